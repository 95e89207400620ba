use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use super::{apply, Context, Env, Featlet};
use crate::error::{Error, Result};

/// A featlet string, identified by its featlet ids joined with `+`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Template {
    id: String,
    featlets: Vec<Featlet>,
}

impl Template {
    pub fn new(featlets: Vec<Featlet>) -> Result<Self> {
        if featlets.is_empty() {
            return Err(Error::InvalidTemplate("empty template".into()));
        }
        let id = featlets
            .iter()
            .map(|f| f.id())
            .collect::<Vec<_>>()
            .join("+");
        Ok(Template { id, featlets })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn featlets(&self) -> &[Featlet] {
        &self.featlets
    }

    pub fn len(&self) -> usize {
        self.featlets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.featlets.is_empty()
    }

    pub fn contains(&self, f: Featlet) -> bool {
        self.featlets.contains(&f)
    }

    /// This template with `f` appended.
    pub fn with(&self, f: Featlet) -> Template {
        let mut featlets = self.featlets.clone();
        featlets.push(f);
        Template {
            id: format!("{}+{}", self.id, f.id()),
            featlets,
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let featlets = s
            .split('+')
            .map(str::parse)
            .collect::<Result<Vec<Featlet>>>()?;
        Template::new(featlets)
    }
}

/// Runs a template on a fresh context. FAIL anywhere yields no values.
pub fn run_template(t: &Template, env: &Env) -> Vec<String> {
    let mut ctx = Context::default();
    for &f in t.featlets() {
        if !apply(f, &mut ctx, env) {
            return Vec::new();
        }
    }
    let last = *t.featlets().last().expect("templates are nonempty");
    if !last.produces_output() && !apply(Featlet::Output, &mut ctx, env) {
        return Vec::new();
    }
    ctx.outputs
}

/// A multiset of templates, kept sorted by template id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureProduct {
    id: String,
    templates: Vec<Template>,
}

impl FeatureProduct {
    pub fn new(mut templates: Vec<Template>) -> Result<Self> {
        if templates.is_empty() {
            return Err(Error::InvalidTemplate("empty product".into()));
        }
        templates.sort_by(|a, b| a.id.cmp(&b.id));
        let id = templates
            .iter()
            .map(|t| t.id.as_str())
            .collect::<Vec<_>>()
            .join(";");
        Ok(FeatureProduct { id, templates })
    }

    pub fn single(t: Template) -> Self {
        FeatureProduct {
            id: t.id.clone(),
            templates: vec![t],
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn order(&self) -> usize {
        self.templates.len()
    }

    pub fn contains_featlet(&self, f: Featlet) -> bool {
        self.templates.iter().any(|t| t.contains(f))
    }

    /// Joins one value list per member template into product features. Any
    /// empty member suppresses the product.
    pub fn combine(&self, values: &[&[String]]) -> Vec<String> {
        debug_assert_eq!(values.len(), self.templates.len());
        if values.iter().any(|v| v.is_empty()) {
            return Vec::new();
        }
        let mut out = vec![format!("{}=", self.id)];
        for (i, vs) in values.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * vs.len());
            for prefix in &out {
                for v in vs.iter() {
                    let mut s = prefix.clone();
                    if i > 0 {
                        s.push('*');
                    }
                    s.push_str(v);
                    next.push(s);
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Display for FeatureProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

impl FromStr for FeatureProduct {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let templates = s
            .split(';')
            .map(str::parse)
            .collect::<Result<Vec<Template>>>()?;
        FeatureProduct::new(templates)
    }
}

/// Runs every member on its own fresh context and joins their values.
pub fn run_product(p: &FeatureProduct, env: &Env) -> Vec<String> {
    let mut outs = Vec::with_capacity(p.order());
    for t in p.templates() {
        let v = run_template(t, env);
        if v.is_empty() {
            return Vec::new();
        }
        outs.push(v);
    }
    let refs: Vec<&[String]> = outs.iter().map(Vec::as_slice).collect();
    p.combine(&refs)
}

/// `order<TAB>template;template...` per line, preceded by optional `#` lines.
pub fn write_feature_set(header: &[String], products: &[FeatureProduct]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for p in products {
        let _ = writeln!(out, "{}\t{}", p.order(), p.id());
    }
    out
}

pub fn parse_feature_set(text: &str, path: &str) -> Result<Vec<FeatureProduct>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (order, id) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i + 1, "expected `order<TAB>product`"))?;
        let order: usize = order
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad order `{order}`")))?;
        let p: FeatureProduct = id
            .parse()
            .map_err(|e| Error::parse(path, i + 1, format!("{e}")))?;
        if p.order() != order {
            return Err(Error::parse(
                path,
                i + 1,
                format!("order {order} but {} templates", p.order()),
            ));
        }
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::apply::tests::{instance, sentence};
    use super::*;
    use crate::context::Instance;
    use crate::corpus::{Lexicons, Span};

    fn with_env<R>(inst: Option<Instance>, f: impl FnOnce(&Env) -> R) -> R {
        let sent = sentence();
        let inst = inst.unwrap_or_else(|| instance(&sent));
        let lex = Lexicons::default();
        f(&Env {
            sent: &sent,
            lex: &lex,
            inst: &inst,
            freq: None,
        })
    }

    fn t(s: &str) -> Template {
        s.parse().unwrap()
    }

    #[test]
    fn arg_head_word() {
        let out = with_env(None, |env| run_template(&t("ArgHead+Word"), env));
        assert_eq!(out, ["dog"]);
    }

    #[test]
    fn arg_span_shape_is_empty() {
        let out = with_env(None, |env| run_template(&t("ArgSpan+Shape"), env));
        assert!(out.is_empty());
    }

    #[test]
    fn target_head_pos_prefix() {
        // an NNP target: McDonalds
        let sent = sentence();
        let inst = Instance::new(0, &sent, Span::new(1, 2), "X");
        let out = with_env(Some(inst), |env| {
            run_template(&t("TargetHead+Token2ToToken1+Pos+Prefix1"), env)
        });
        assert_eq!(out, ["N"]);
    }

    #[test]
    fn products_join_and_modulate() {
        let p: FeatureProduct = "Role;ArgHead+Word".parse().unwrap();
        assert_eq!(p.id(), "ArgHead+Word;Role");
        let out = with_env(None, |env| run_product(&p, env));
        assert_eq!(out, ["ArgHead+Word;Role=dog*Theme"]);

        let q: FeatureProduct = "ArgHead+Word;ArgSpan+Shape".parse().unwrap();
        assert!(with_env(None, |env| run_product(&q, env)).is_empty());
    }

    #[test]
    fn cross_product_of_multi_valued_members() {
        let p: FeatureProduct = "Frame;Role".parse().unwrap();
        let a = vec!["x".to_string(), "y".to_string()];
        let b = vec!["1".to_string(), "2".to_string()];
        let out = p.combine(&[&a, &b]);
        assert_eq!(
            out,
            [
                "Frame;Role=x*1",
                "Frame;Role=x*2",
                "Frame;Role=y*1",
                "Frame;Role=y*2"
            ]
        );
    }

    #[test]
    fn feature_set_round_trip() {
        let ps: Vec<FeatureProduct> = [
            "ArgHead+Word",
            "Role;ArgHead+PrefixN(2)",
            "ArgSpan+ParentC+CategoryC+Bag;Frame;Role",
        ]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
        let text = write_feature_set(&["seed=1".into()], &ps);
        assert_eq!(parse_feature_set(&text, "f").unwrap(), ps);
        assert!(parse_feature_set("2\tArgHead+Word\n", "f").is_err());
        assert!(parse_feature_set("1\tArgHead+Bogus\n", "f").is_err());
    }
}
