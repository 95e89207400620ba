use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use log::info;

use featlets::context::{
    parse_feature_set, run_product, write_feature_set, Env, FeatureProduct, FreqStats, Instance,
};
use featlets::corpus::toy::{self, ToyConfig};
use featlets::corpus::{
    load_corpus, write_annotations, write_sentences, Corpus, Lexicons, Span, BROWN1000_FILE,
    BROWN256_FILE, CLOSED_CLASS_FILE, SYNSETS_FILE,
};
use featlets::discovery::{
    apply_freq_transforms, count_values, enumerate_templates, gold_instances, parse_inventory,
    write_inventory, SearchConfig,
};
use featlets::selection::{
    final_rank, parse_scores, score_stage, write_scores, BudgetPlan, Estimator, ScoringConfig,
};
use featlets::similarity::SimilarityParams;
use featlets::srl::{
    argid_instances, assemble, best_model, decode_all, evaluate, gold_predictions, parse_model,
    role_inventory, roleclass_instances, sensitivity_grid, train_argid, train_roleclass,
    write_model, write_predictions, ArgSource, Stage, TrainConfig, TrainData,
};

use crate::config::{Config, List};
use crate::run::{with_header, Run};
use crate::{
    Command, CountArgs, DataArgs, EnumerateArgs, EvalArgs, ExtractArgs, GenToyArgs, GridArgs,
    ScoreArgs, SelectArgs, Split, TrainArgs, TrainOpts,
};

/// Selection defaults, after the original experiments.
const BETAS: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
const SET_SIZE: usize = 1280;
const GRID_SIZES: [usize; 4] = [0, 320, 640, 1280];

pub fn dispatch(cmd: Command, config: Config, workers: usize) -> Result<()> {
    match cmd {
        Command::GenToy(a) => gen_toy(a, Run::new("gen-toy", config, workers)),
        Command::Enumerate(a) => enumerate(a, Run::new("enumerate", config, workers)),
        Command::Count(a) => count(a, Run::new("count", config, workers)),
        Command::Score(a) => score(a, Run::new("score", config, workers)),
        Command::Select(a) => select(a, Run::new("select", config, workers)),
        Command::Train(a) => train(a, Run::new("train", config, workers)),
        Command::Eval(a) => eval(a, Run::new("eval", config, workers)),
        Command::Grid(a) => grid(a, Run::new("grid", config, workers)),
        Command::Extract(a) => extract(a, Run::new("extract", config, workers)),
    }
}

fn gen_toy(a: GenToyArgs, mut run: Run) -> Result<()> {
    let cfg = ToyConfig {
        seed: run.param("seed", a.seed, 7)?,
        sentences: a.sentences,
        test: a.test,
        noise: a.noise,
        noisy_test: a.noisy_test,
    };
    run.note("sentences", &cfg.sentences);
    run.note("test", &cfg.test);
    run.note("noise", &cfg.noise);
    run.note("noisy_test", &cfg.noisy_test);
    if !(0.0..=1.0).contains(&cfg.noise) {
        bail!("noise must be a probability, got {}", cfg.noise);
    }
    let t = toy::generate(&cfg);
    let out = &a.out;
    run.output(
        out.join(toy::TRAIN_CORPUS),
        write_sentences(&t.train.sentences),
    );
    run.output(
        out.join(toy::TRAIN_ANN),
        write_annotations(&t.train.annotations),
    );
    run.output(
        out.join(toy::TEST_CORPUS),
        write_sentences(&t.test.sentences),
    );
    run.output(
        out.join(toy::TEST_ANN),
        write_annotations(&t.test.annotations),
    );
    for (name, text) in t.lexicons.files() {
        run.output(out.join(name), text);
    }
    run.manifest_in(out);
    info!(
        "{} train and {} test sentences in {}",
        t.train.sentences.len(),
        t.test.sentences.len(),
        out.display()
    );
    run.commit()
}

fn load_split(run: &mut Run, data: &DataArgs, split: Split) -> Result<Corpus> {
    let (c, a) = match split {
        Split::Train => (toy::TRAIN_CORPUS, toy::TRAIN_ANN),
        Split::Test => (toy::TEST_CORPUS, toy::TEST_ANN),
    };
    let (cp, ap) = (data.data.join(c), data.data.join(a));
    run.hash_input(c, &cp)?;
    run.hash_input(a, &ap)?;
    let corpus = load_corpus(&cp, &ap)?;
    for r in &corpus.rejected {
        log::warn!(
            "dropped sentence {} (line {}): {}",
            r.sentence_id,
            r.line,
            r.reason
        );
    }
    Ok(corpus)
}

fn load_lexicons(run: &mut Run, data: &DataArgs) -> Result<Lexicons> {
    for name in [
        BROWN256_FILE,
        BROWN1000_FILE,
        SYNSETS_FILE,
        CLOSED_CLASS_FILE,
    ] {
        run.hash_input(name, &data.data.join(name))?;
    }
    Ok(Lexicons::load_dir(&data.data)?)
}

fn load_freq(run: &mut Run, path: &Path) -> Result<FreqStats> {
    let text = run.read("freq", path)?;
    Ok(FreqStats::from_tsv(&text, &path.display().to_string())?)
}

fn load_features(
    run: &mut Run,
    role: &str,
    path: &Path,
    stage: Stage,
) -> Result<Vec<FeatureProduct>> {
    let text = run.read(role, path)?;
    let products = parse_feature_set(&text, &path.display().to_string())?;
    stage
        .check(&products)
        .with_context(|| format!("{} is not a {stage} feature set", path.display()))?;
    Ok(products)
}

fn enumerate(a: EnumerateArgs, mut run: Run) -> Result<()> {
    let d = SearchConfig::default();
    let cfg = SearchConfig {
        max_len: run.param("max_len", a.max_len, d.max_len)?,
        probes: run.param("probes", a.probes, d.probes)?,
        min_fire: run.param("min_fire", a.min_fire, d.min_fire)?,
        seed: run.param("seed", a.seed, d.seed)?,
    };
    let corpus = load_split(&mut run, &a.data, Split::Train)?;
    let lex = load_lexicons(&mut run, &a.data)?;
    let templates = enumerate_templates(&corpus, &lex, &cfg)?;
    info!("{} templates", templates.len());
    run.output(&a.out, write_inventory(&run.header(), &templates));
    run.commit()
}

fn count(a: CountArgs, mut run: Run) -> Result<()> {
    let corpus = load_split(&mut run, &a.data, Split::Train)?;
    let lex = load_lexicons(&mut run, &a.data)?;
    let text = run.read("inventory", &a.inventory)?;
    let base = parse_inventory(&text, &a.inventory.display().to_string())?;
    let freq = count_values(&base, &corpus, &lex, &gold_instances(&corpus));
    run.output(&a.out, with_header(&run.header(), &freq.to_tsv()));
    run.commit()
}

fn scores_path(dir: &Path, stage: Stage) -> PathBuf {
    dir.join(format!("scores.{stage}.tsv"))
}

fn score(a: ScoreArgs, mut run: Run) -> Result<()> {
    let d = BudgetPlan::default();
    let plan = BudgetPlan {
        b: run.param("b", a.b, d.b)?,
        gamma: run.param("gamma", a.gamma, d.gamma)?,
        max_order: run.param("max_order", a.max_order, d.max_order)?,
    };
    let scale = run.param("scale", a.scale, 1.0)?;
    plan.validate()?;
    let dc = ScoringConfig::default();
    let cfg = ScoringConfig {
        // half of the budget goes to each stage
        plan: plan.scaled(scale * 0.5),
        estimator: run.param("estimator", a.estimator, Estimator::Bub)?,
        sigma: run.param("sigma", a.sigma, dc.sigma)?,
        seed: run.param("seed", a.seed, dc.seed)?,
    };
    let beta = run.param("beta", a.beta, List(BETAS.to_vec()))?.0[0];

    let corpus = load_split(&mut run, &a.data, Split::Train)?;
    let lex = load_lexicons(&mut run, &a.data)?;
    let text = run.read("inventory", &a.inventory)?;
    let inventory =
        apply_freq_transforms(&parse_inventory(&text, &a.inventory.display().to_string())?);
    let freq = load_freq(&mut run, &a.freq)?;
    let anns: Vec<_> = corpus.annotations.iter().collect();
    let stages: Vec<Stage> = match a.stage {
        Some(s) => vec![s],
        None => Stage::ALL.to_vec(),
    };
    for stage in stages {
        let insts = match stage {
            Stage::ArgId => argid_instances(&corpus, &anns, true),
            Stage::RoleClass => roleclass_instances(&corpus, &anns, &role_inventory(&corpus)),
        };
        let s = score_stage(stage, &inventory, &corpus, &lex, &freq, &insts, &cfg)?;
        info!(
            "{stage}: {} instances, {} templates, quotas {:?}",
            insts.len(),
            s.pool,
            s.quotas
        );
        let mut header = run.header();
        header.push(format!("stage = {stage}"));
        header.push(format!("templates = {}", s.pool));
        header.push(format!("quotas = {}", List(s.quotas.clone())));
        run.output(
            scores_path(&a.out, stage),
            write_scores(&header, &s.scored, beta),
        );
    }
    run.manifest_in(&a.out);
    run.commit()
}

fn features_path(dir: &Path, stage: Stage, beta: f64) -> PathBuf {
    dir.join(format!("features.{stage}.beta{beta}.txt"))
}

fn select(a: SelectArgs, mut run: Run) -> Result<()> {
    let betas = run.param("beta", a.beta, List(BETAS.to_vec()))?.0;
    let size = run.param("size", a.size, SET_SIZE)?;
    let d = SimilarityParams::default();
    let params = SimilarityParams {
        k: run.param("k", a.k, d.k)?,
        dup_threshold: run.param("threshold", a.threshold, d.dup_threshold)?,
    };
    let mut found = false;
    for stage in Stage::ALL {
        let path = scores_path(&a.scores, stage);
        if !path.exists() {
            continue;
        }
        found = true;
        let scored = parse_scores(&run.read(stage.name(), &path)?, &path.display().to_string())?;
        for &beta in &betas {
            let kept: Vec<FeatureProduct> = final_rank(scored.clone(), beta, &params, Some(size))
                .into_iter()
                .map(|s| s.product)
                .collect();
            stage.check(&kept)?;
            info!("{stage} beta {beta}: {} features", kept.len());
            let mut header = run.header();
            header.push(format!("stage = {stage}"));
            header.push(format!("selected_beta = {beta}"));
            run.output(
                features_path(&a.out, stage, beta),
                write_feature_set(&header, &kept),
            );
        }
    }
    if !found {
        bail!("no scores.<stage>.tsv in {}", a.scores.display());
    }
    run.manifest_in(&a.out);
    run.commit()
}

fn train_config(run: &mut Run, o: &TrainOpts) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    Ok(TrainConfig {
        passes: run.param("passes", o.passes, d.passes)?,
        seed: run.param("seed", o.seed, d.seed)?,
        dev_fraction: run.param("dev_fraction", o.dev_fraction, d.dev_fraction)?,
        gold_union: run.param("gold_union", o.gold_union, d.gold_union)?,
    })
}

fn train(a: TrainArgs, mut run: Run) -> Result<()> {
    if a.argid.len() != a.roleclass.len() {
        bail!(
            "{} --argid but {} --roleclass feature sets; give them in pairs",
            a.argid.len(),
            a.roleclass.len()
        );
    }
    let cfg = train_config(&mut run, &a.opts)?;
    let corpus = load_split(&mut run, &a.data, Split::Train)?;
    let lex = load_lexicons(&mut run, &a.data)?;
    let freq = load_freq(&mut run, &a.freq)?;
    let mut sets = Vec::new();
    for (i, (ap, rp)) in a.argid.iter().zip(&a.roleclass).enumerate() {
        sets.push((
            load_features(&mut run, &format!("argid.{i}"), ap, Stage::ArgId)?,
            load_features(&mut run, &format!("roleclass.{i}"), rp, Stage::RoleClass)?,
        ));
    }
    let data = TrainData::split(&corpus, &lex, Some(&freq), &cfg)?;
    let mut models = Vec::new();
    for (i, (af, rf)) in sets.iter().enumerate() {
        let m = assemble(
            &data,
            train_argid(&data, af, &cfg)?,
            train_roleclass(&data, rf, &cfg)?,
        )?;
        info!(
            "pair {i}: argid dev F1 {:.4} (pass {}), roleclass dev accuracy {:.4} (pass {}), dev F1 {:.4}",
            m.argid.best_dev_f1,
            m.argid.best_pass,
            m.roleclass.best_dev_f1,
            m.roleclass.best_pass,
            m.dev_f1
        );
        run.note(&format!("dev_f1.{i}"), &m.dev_f1);
        models.push(m);
    }
    let best = best_model(&models).expect("at least one pair");
    run.note("chosen", &best);
    run.output(&a.out, write_model(&run.header(), &models[best]));
    run.commit()
}

fn eval(a: EvalArgs, mut run: Run) -> Result<()> {
    run.note("split", &format!("{:?}", a.split).to_lowercase());
    run.note("gold_args", &a.gold_args);
    let corpus = load_split(&mut run, &a.data, a.split)?;
    let lex = load_lexicons(&mut run, &a.data)?;
    let freq = load_freq(&mut run, &a.freq)?;
    let text = run.read("model", &a.model)?;
    let model = parse_model(&text, &a.model.display().to_string())?;
    let anns: Vec<_> = corpus.annotations.iter().collect();
    let source = if a.gold_args {
        ArgSource::Gold
    } else {
        ArgSource::Model
    };
    let (pred, stats) = decode_all(&model, &corpus, &lex, Some(&freq), &anns, source)?;
    let m = evaluate(&pred, &gold_predictions(&anns));
    info!("P {:.4} R {:.4} F1 {:.4}", m.precision, m.recall, m.f1);
    let report = format!(
        "precision\t{}\nrecall\t{}\nf1\t{}\ntp\t{}\nfp\t{}\nfn\t{}\ntargets\t{}\ncandidates\t{}\narguments\t{}\nargid_evals\t{}\nroleclass_evals\t{}\n",
        m.precision,
        m.recall,
        m.f1,
        m.tp,
        m.fp,
        m.fn_,
        anns.len(),
        stats.candidates,
        stats.arguments,
        stats.argid_evals,
        stats.roleclass_evals
    );
    let header = run.header();
    run.output(&a.out, with_header(&header, &report));
    if let Some(p) = &a.predictions {
        run.output(p, write_predictions(&header, &pred));
    }
    run.commit()
}

fn grid(a: GridArgs, mut run: Run) -> Result<()> {
    let sizes = run.param("sizes", a.sizes, List(GRID_SIZES.to_vec()))?.0;
    let cfg = train_config(&mut run, &a.opts)?;
    let corpus = load_split(&mut run, &a.data, Split::Train)?;
    let test = load_split(&mut run, &a.data, Split::Test)?;
    let lex = load_lexicons(&mut run, &a.data)?;
    let freq = load_freq(&mut run, &a.freq)?;
    let af = load_features(&mut run, "argid", &a.argid, Stage::ArgId)?;
    let rf = load_features(&mut run, "roleclass", &a.roleclass, Stage::RoleClass)?;
    let data = TrainData::split(&corpus, &lex, Some(&freq), &cfg)?;
    let g = sensitivity_grid(&data, &test, &af, &rf, &sizes, &cfg)?;
    let inv = g.inversions();
    info!("{} inversions", inv.len());
    let mut header = run.header();
    header.push(format!("inversions = {}", inv.len()));
    run.output(&a.out, g.to_tsv(&header));
    run.commit()
}

fn parse_instance(corpus: &Corpus, id: &str) -> Result<Instance> {
    let parts: Vec<&str> = id.split('/').collect();
    if !(3..=4).contains(&parts.len()) {
        bail!("instance `{id}`: expected `sentence/target/argument[/role]`");
    }
    let si = corpus
        .sentence_index(parts[0])
        .with_context(|| format!("no sentence `{}`", parts[0]))?;
    let sent = &corpus.sentences[si];
    let target: Span = parts[1].parse()?;
    let arg: Span = parts[2].parse()?;
    if target.end > sent.len() || arg.end > sent.len() {
        bail!(
            "instance `{id}`: span outside the {}-token sentence",
            sent.len()
        );
    }
    let ann = corpus
        .annotations
        .iter()
        .find(|a| a.sentence_id == parts[0] && a.target == target)
        .with_context(|| format!("no target {target} in `{}`", parts[0]))?;
    let mut inst = Instance::new(si, sent, target, &ann.frame).with_arg(sent, arg);
    if let Some(r) = parts.get(3) {
        inst = inst.with_role(r);
    }
    inst.gold = ann.args.iter().any(|x| x.span == arg);
    Ok(inst)
}

fn extract(a: ExtractArgs, mut run: Run) -> Result<()> {
    run.note("instance", &a.instance);
    run.note("template", &a.template);
    let corpus = load_split(&mut run, &a.data, a.split)?;
    let lex = load_lexicons(&mut run, &a.data)?;
    let freq = match &a.freq {
        Some(p) => Some(load_freq(&mut run, p)?),
        None => None,
    };
    let product: FeatureProduct = a.template.parse()?;
    let inst = parse_instance(&corpus, &a.instance)?;
    let env = Env {
        sent: &corpus.sentences[inst.sentence],
        lex: &lex,
        inst: &inst,
        freq: freq.as_ref(),
    };
    let values = run_product(&product, &env);
    let mut body = String::new();
    for v in &values {
        println!("{v}");
        body.push_str(v);
        body.push('\n');
    }
    if values.is_empty() {
        info!("nothing fired");
    }
    if let Some(out) = &a.out {
        run.output(out, with_header(&run.header(), &body));
        run.commit()?;
    }
    Ok(())
}
