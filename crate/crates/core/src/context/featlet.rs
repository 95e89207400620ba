use std::collections::HashMap;
use std::fmt;
use std::ops::{BitAnd, BitOr, Not};
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Left,
    Right,
}

impl Dir {
    fn name(self) -> &'static str {
        match self {
            Dir::Left => "Left",
            Dir::Right => "Right",
        }
    }

    pub fn flip(self) -> Dir {
        match self {
            Dir::Left => Dir::Right,
            Dir::Right => Dir::Left,
        }
    }
}

/// Token attribute read by token extractors and sequence representers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attr {
    Word,
    Pos,
    Lemma,
    WnSynset,
    BrownClust256,
    BrownClust1000,
}

impl Attr {
    pub const ALL: [Attr; 6] = [
        Attr::Word,
        Attr::Pos,
        Attr::Lemma,
        Attr::WnSynset,
        Attr::BrownClust256,
        Attr::BrownClust1000,
    ];

    fn name(self) -> &'static str {
        match self {
            Attr::Word => "Word",
            Attr::Pos => "Pos",
            Attr::Lemma => "Lemma",
            Attr::WnSynset => "WnSynset",
            Attr::BrownClust256 => "BrownClust256",
            Attr::BrownClust1000 => "BrownClust1000",
        }
    }
}

/// How a dependency step is written by a sequence representer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeRepr {
    DepRel,
    Dir,
    Star,
}

impl EdgeRepr {
    const ALL: [EdgeRepr; 3] = [EdgeRepr::DepRel, EdgeRepr::Dir, EdgeRepr::Star];

    fn name(self) -> &'static str {
        match self {
            EdgeRepr::DepRel => "DepRel",
            EdgeRepr::Dir => "Dir",
            EdgeRepr::Star => "Star",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    LabelExtractor,
    TokenExtractor,
    ValueMutator,
    DepWalker,
    SeqReducer,
    DepRepresenter,
    ConsWalker,
    ConsRepresenter,
    TreeWalker,
    LinearWalker,
    DistanceFn,
    DistanceRepresenter,
    FreqTransform,
    Plumbing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Featlet {
    TargetSpan,
    TargetHead,
    ArgSpan,
    ArgHead,
    Role,
    FrameRole,
    Frame,

    Token(Attr),
    DepRel,
    DepthD,

    Lc,
    Shape,
    Prefix(u8),
    ClosedClass,

    ParentD,
    ChildD(Dir),
    SibD(Dir),
    MostSibD(Dir),

    Ngrams(u8),
    Bag,
    SeqN(u8),
    CompressRuns,

    /// Maps dependency steps to `edge` or `attr(parent)/edge`.
    SeqMapEdge(Option<Attr>, EdgeRepr),
    /// Maps token items to an attribute.
    SeqMapToken(Attr),

    ParentC,
    ChildC(Dir),
    SibC(Dir),
    MostSibC(Dir),

    CategoryC,
    SubCategoryC,

    ToRootD,
    CommonParentD,
    ToRootC,
    CommonParentC,
    ChildrenD,
    ChildrenC,

    StepL(Dir),
    Span1StartToEndL,
    Span1LeftToRightL,
    Head1ToSpan1StartL,
    Head1ToSpan1EndL,
    Span1ToSpan2L,

    SeqLength,
    DeltaDepthD,
    DeltaDepthC,

    DasBuckets,
    Direction,

    Output,
    Span1Start,
    Span1End,
    Span2ToSpan1,
    Token2ToToken1,

    Top(u16),
    Cnt(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Token1,
    Token2,
    Span1,
    Span2,
    Value,
    Sequence,
}

/// Bit set over [`Field`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct FieldSet(u8);

impl FieldSet {
    pub const EMPTY: FieldSet = FieldSet(0);

    pub const fn of(f: Field) -> FieldSet {
        FieldSet(1 << f as u8)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// One bit per field, in declaration order.
    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, f: Field) -> bool {
        self.0 & (1 << f as u8) != 0
    }
}

impl BitOr for FieldSet {
    type Output = FieldSet;
    fn bitor(self, rhs: FieldSet) -> FieldSet {
        FieldSet(self.0 | rhs.0)
    }
}

impl BitAnd for FieldSet {
    type Output = FieldSet;
    fn bitand(self, rhs: FieldSet) -> FieldSet {
        FieldSet(self.0 & rhs.0)
    }
}

impl Not for FieldSet {
    type Output = FieldSet;
    fn not(self) -> FieldSet {
        FieldSet(!self.0 & 0b11_1111)
    }
}

const T1: FieldSet = FieldSet::of(Field::Token1);
const T2: FieldSet = FieldSet::of(Field::Token2);
const S1: FieldSet = FieldSet::of(Field::Span1);
const S2: FieldSet = FieldSet::of(Field::Span2);
const VAL: FieldSet = FieldSet::of(Field::Value);
const SEQ: FieldSet = FieldSet::of(Field::Sequence);
const NONE: FieldSet = FieldSet::EMPTY;

const DIRS: [Dir; 2] = [Dir::Left, Dir::Right];

/// Number of featlets in [`Featlet::registry`].
pub const REGISTRY_LEN: usize = 94;

impl Featlet {
    /// Every featlet, in canonical order. Label extractors come first and
    /// their relative order is the one enforced on leading label blocks.
    pub fn registry() -> &'static [Featlet] {
        static REG: OnceLock<Vec<Featlet>> = OnceLock::new();
        REG.get_or_init(build_registry)
    }

    /// Position in [`Featlet::registry`].
    pub fn index(self) -> usize {
        static IDX: OnceLock<HashMap<Featlet, usize>> = OnceLock::new();
        IDX.get_or_init(|| {
            Featlet::registry()
                .iter()
                .enumerate()
                .map(|(i, &f)| (f, i))
                .collect()
        })[&self]
    }

    pub fn kind(self) -> Kind {
        use Featlet::*;
        match self {
            TargetSpan | TargetHead | ArgSpan | ArgHead | Role | FrameRole | Frame => {
                Kind::LabelExtractor
            }
            Token(_) | DepRel | DepthD => Kind::TokenExtractor,
            Lc | Shape | Prefix(_) | ClosedClass => Kind::ValueMutator,
            ParentD | ChildD(_) | SibD(_) | MostSibD(_) => Kind::DepWalker,
            Ngrams(_) | Bag | SeqN(_) | CompressRuns => Kind::SeqReducer,
            SeqMapEdge(..) | SeqMapToken(_) => Kind::DepRepresenter,
            ParentC | ChildC(_) | SibC(_) | MostSibC(_) => Kind::ConsWalker,
            CategoryC | SubCategoryC => Kind::ConsRepresenter,
            ToRootD | CommonParentD | ToRootC | CommonParentC | ChildrenD | ChildrenC => {
                Kind::TreeWalker
            }
            StepL(_) | Span1StartToEndL | Span1LeftToRightL | Head1ToSpan1StartL
            | Head1ToSpan1EndL | Span1ToSpan2L => Kind::LinearWalker,
            SeqLength | DeltaDepthD | DeltaDepthC => Kind::DistanceFn,
            DasBuckets | Direction => Kind::DistanceRepresenter,
            Top(_) | Cnt(_) => Kind::FreqTransform,
            Output | Span1Start | Span1End | Span2ToSpan1 | Token2ToToken1 => Kind::Plumbing,
        }
    }

    pub fn is_label_extractor(self) -> bool {
        self.kind() == Kind::LabelExtractor
    }

    /// Featlets that push to the output buffer. A template ending in one of
    /// these gets no implicit Output.
    pub fn produces_output(self) -> bool {
        matches!(
            self,
            Featlet::Output
                | Featlet::Ngrams(_)
                | Featlet::Bag
                | Featlet::SeqN(_)
                | Featlet::Top(_)
                | Featlet::Cnt(_)
        )
    }

    /// Fields whose current contents this featlet consumes.
    pub fn reads(self) -> FieldSet {
        use Featlet::*;
        match self {
            TargetSpan | TargetHead | ArgSpan | ArgHead | Role | FrameRole | Frame => NONE,
            Token(_) | DepRel | DepthD => T1,
            Lc | Shape | Prefix(_) => VAL,
            ClosedClass => T1 | VAL,
            ParentD | ChildD(_) | SibD(_) | MostSibD(_) | StepL(_) => T1,
            Ngrams(_) | Bag | SeqN(_) => SEQ | VAL,
            CompressRuns | SeqMapEdge(..) | SeqMapToken(_) | CategoryC | SubCategoryC => SEQ,
            ParentC | ChildC(_) | SibC(_) | MostSibC(_) => S1,
            ToRootD | ChildrenD => T1,
            CommonParentD => T1 | T2,
            ToRootC | ChildrenC | Span1StartToEndL | Span1LeftToRightL => S1,
            CommonParentC | Span1ToSpan2L => S1 | S2,
            Head1ToSpan1StartL | Head1ToSpan1EndL => T1 | S1,
            SeqLength | DeltaDepthD | DeltaDepthC => SEQ,
            DasBuckets | Direction => VAL,
            Output | Top(_) | Cnt(_) => VAL,
            Span1Start | Span1End => S1,
            Span2ToSpan1 => S2,
            Token2ToToken1 => T2,
        }
    }

    /// Fields this featlet overwrites with something meant to be read later.
    pub fn writes(self) -> FieldSet {
        use Featlet::*;
        match self {
            TargetSpan => S2,
            TargetHead => T2,
            ArgSpan => S1,
            ArgHead => T1,
            Role | FrameRole | Frame => VAL,
            Token(_) | DepRel | DepthD => VAL,
            Lc | Shape | Prefix(_) | ClosedClass => VAL,
            ParentD | ChildD(_) | SibD(_) | MostSibD(_) | StepL(_) => T1,
            CompressRuns | SeqMapEdge(..) | SeqMapToken(_) | CategoryC | SubCategoryC => SEQ,
            ParentC | ChildC(_) | SibC(_) | MostSibC(_) => S1,
            SeqLength | DeltaDepthD | DeltaDepthC => VAL,
            DasBuckets | Direction => VAL,
            Span1Start | Span1End | Token2ToToken1 => T1,
            Span2ToSpan1 => S1,
            _ => NONE,
        }
    }

    /// Fields this featlet extends without consuming what is already there.
    /// Walkers append the steps they take to `sequence`.
    pub fn appends(self) -> FieldSet {
        use Featlet::*;
        match self.kind() {
            Kind::DepWalker | Kind::ConsWalker | Kind::TreeWalker => SEQ,
            Kind::LinearWalker if !matches!(self, StepL(_)) => SEQ,
            _ => NONE,
        }
    }

    /// Fields left Nil after this featlet.
    pub fn clears(self) -> FieldSet {
        use Featlet::*;
        match self {
            Ngrams(_) | Bag | SeqN(_) => SEQ | VAL,
            Output | Top(_) | Cnt(_) => VAL,
            _ => NONE,
        }
    }

    /// The featlet a mirrored sentence turns this one into.
    pub fn mirror(self) -> Featlet {
        use Featlet::*;
        match self {
            ChildD(d) => ChildD(d.flip()),
            SibD(d) => SibD(d.flip()),
            MostSibD(d) => MostSibD(d.flip()),
            ChildC(d) => ChildC(d.flip()),
            SibC(d) => SibC(d.flip()),
            MostSibC(d) => MostSibC(d.flip()),
            StepL(d) => StepL(d.flip()),
            Span1Start => Span1End,
            Span1End => Span1Start,
            Head1ToSpan1StartL => Head1ToSpan1EndL,
            Head1ToSpan1EndL => Head1ToSpan1StartL,
            f => f,
        }
    }

    pub fn id(self) -> String {
        self.to_string()
    }
}

fn build_registry() -> Vec<Featlet> {
    use Featlet::*;
    let mut r = vec![
        TargetSpan, TargetHead, ArgSpan, ArgHead, Role, FrameRole, Frame,
    ];
    r.extend(Attr::ALL.iter().map(|&a| Token(a)));
    r.extend([DepRel, DepthD, Lc, Shape]);
    r.extend((1..=4).map(Prefix));
    r.push(ClosedClass);
    r.push(ParentD);
    r.extend(DIRS.map(ChildD));
    r.extend(DIRS.map(SibD));
    r.extend(DIRS.map(MostSibD));
    r.extend([
        Ngrams(2),
        Ngrams(3),
        Bag,
        SeqN(3),
        SeqN(4),
        SeqN(5),
        CompressRuns,
    ]);
    r.extend(EdgeRepr::ALL.map(|e| SeqMapEdge(None, e)));
    for a in [
        Attr::Word,
        Attr::Pos,
        Attr::Lemma,
        Attr::BrownClust256,
        Attr::BrownClust1000,
    ] {
        r.extend(EdgeRepr::ALL.map(|e| SeqMapEdge(Some(a), e)));
    }
    r.extend([Attr::Word, Attr::Pos, Attr::Lemma].map(SeqMapToken));
    r.push(ParentC);
    r.extend(DIRS.map(ChildC));
    r.extend(DIRS.map(SibC));
    r.extend(DIRS.map(MostSibC));
    r.extend([CategoryC, SubCategoryC]);
    r.extend([
        ToRootD,
        CommonParentD,
        ToRootC,
        CommonParentC,
        ChildrenD,
        ChildrenC,
    ]);
    r.extend(DIRS.map(StepL));
    r.extend([
        Span1StartToEndL,
        Span1LeftToRightL,
        Head1ToSpan1StartL,
        Head1ToSpan1EndL,
        Span1ToSpan2L,
    ]);
    r.extend([SeqLength, DeltaDepthD, DeltaDepthC, DasBuckets, Direction]);
    r.extend([Output, Span1Start, Span1End, Span2ToSpan1, Token2ToToken1]);
    r.extend([Top(10), Top(100), Top(1000), Cnt(8), Cnt(16)]);
    r
}

impl fmt::Display for Featlet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Featlet::*;
        match *self {
            TargetSpan => f.write_str("TargetSpan"),
            TargetHead => f.write_str("TargetHead"),
            ArgSpan => f.write_str("ArgSpan"),
            ArgHead => f.write_str("ArgHead"),
            Role => f.write_str("Role"),
            FrameRole => f.write_str("FrameRole"),
            Frame => f.write_str("Frame"),
            Token(a) => f.write_str(a.name()),
            DepRel => f.write_str("DepRel"),
            DepthD => f.write_str("DepthD"),
            Lc => f.write_str("LC"),
            Shape => f.write_str("Shape"),
            Prefix(n) => write!(f, "PrefixN({n})"),
            ClosedClass => f.write_str("ClosedClass"),
            ParentD => f.write_str("ParentD"),
            ChildD(d) => write!(f, "{}ChildD", d.name()),
            SibD(d) => write!(f, "{}SibD", d.name()),
            MostSibD(d) => write!(f, "{}MostSibD", d.name()),
            Ngrams(n) => write!(f, "Ngrams({n})"),
            Bag => f.write_str("Bag"),
            SeqN(n) => write!(f, "SeqN({n})"),
            CompressRuns => f.write_str("CompressRuns"),
            SeqMapEdge(None, e) => write!(f, "SeqMap{}", e.name()),
            SeqMapEdge(Some(a), e) => write!(f, "SeqMap{}{}", a.name(), e.name()),
            SeqMapToken(a) => write!(f, "SeqMap{}", a.name()),
            ParentC => f.write_str("ParentC"),
            ChildC(d) => write!(f, "{}ChildC", d.name()),
            SibC(d) => write!(f, "{}SibC", d.name()),
            MostSibC(d) => write!(f, "{}MostSibC", d.name()),
            CategoryC => f.write_str("CategoryC"),
            SubCategoryC => f.write_str("SubCategoryC"),
            ToRootD => f.write_str("ToRootD"),
            CommonParentD => f.write_str("CommonParentD"),
            ToRootC => f.write_str("ToRootC"),
            CommonParentC => f.write_str("CommonParentC"),
            ChildrenD => f.write_str("ChildrenD"),
            ChildrenC => f.write_str("ChildrenC"),
            StepL(d) => write!(f, "{}L", d.name()),
            Span1StartToEndL => f.write_str("Span1StartToEndL"),
            Span1LeftToRightL => f.write_str("Span1LeftToRightL"),
            Head1ToSpan1StartL => f.write_str("Head1ToSpan1StartL"),
            Head1ToSpan1EndL => f.write_str("Head1ToSpan1EndL"),
            Span1ToSpan2L => f.write_str("Span1ToSpan2L"),
            SeqLength => f.write_str("SeqLength"),
            DeltaDepthD => f.write_str("DeltaDepthD"),
            DeltaDepthC => f.write_str("DeltaDepthC"),
            DasBuckets => f.write_str("DasBuckets"),
            Direction => f.write_str("Direction"),
            Output => f.write_str("Output"),
            Span1Start => f.write_str("Span1Start"),
            Span1End => f.write_str("Span1End"),
            Span2ToSpan1 => f.write_str("Span2ToSpan1"),
            Token2ToToken1 => f.write_str("Token2ToToken1"),
            Top(n) => write!(f, "Top{n}"),
            Cnt(n) => write!(f, "Cnt{n}"),
        }
    }
}

fn by_name() -> &'static HashMap<String, Featlet> {
    static MAP: OnceLock<HashMap<String, Featlet>> = OnceLock::new();
    MAP.get_or_init(|| {
        let mut m: HashMap<String, Featlet> =
            Featlet::registry().iter().map(|&f| (f.id(), f)).collect();
        let aliases = [
            ("ChildSequenceD", Featlet::ChildrenD),
            ("RoleArg", Featlet::Role),
            ("FrameRoleArg", Featlet::FrameRole),
            ("Left", Featlet::StepL(Dir::Left)),
            ("Right", Featlet::StepL(Dir::Right)),
            ("Lc", Featlet::Lc),
        ];
        for (name, f) in aliases {
            m.insert(name.to_string(), f);
        }
        for n in 1..=4u8 {
            m.insert(format!("Prefix{n}"), Featlet::Prefix(n));
        }
        m
    })
}

impl FromStr for Featlet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        by_name()
            .get(s.trim())
            .copied()
            .ok_or_else(|| Error::UnknownFeatlet(s.to_string()))
    }
}
