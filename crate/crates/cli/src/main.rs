mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::RngCore;

use report::{Report, RunManifest};
use tvd_core::approx::{tv_bounded, tv_sample_acyclic, LengthMethod, RNG_ALGORITHM};
use tvd_core::automata::{
    count_accepted, emptiness_witness_search, extract_count, pa_accept_prob, reduce_nfa,
    reduce_pa, ReductionKind, ReductionOutput, DEFAULT_SUBSET_CAP,
};
use tvd_core::exact::{
    distinguishing_word, lk_distance_acyclic, threshold_decide_acyclic, tv_distance_acyclic,
    DEFAULT_BUDGET,
};
use tvd_core::io::{read_distribution, read_lmc, read_lmc_unchecked, read_nfa, read_pa, write_distribution, write_lmc};
use tvd_core::rational::parse_rational;
use tvd_core::{Error, InitialDistribution, Lmc, Rational};

const DEFAULT_SEED: u64 = 0;

/// Longest witness list printed in a report.
const MAX_LISTED_WORDS: usize = 50;

#[derive(Parser)]
#[command(name = "tvd", version, about = "Total variation distance between labelled Markov chains")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Single {
    /// Chain file (JSON).
    model: PathBuf,
    /// Initial distribution: a JSON file or `state:NAME`.
    #[arg(long, alias = "pi")]
    pi1: String,
}

#[derive(Args)]
struct Pair {
    /// Chain file (JSON).
    model: PathBuf,
    /// Optional second chain over the same alphabet. `--pi2` then refers to
    /// its states and both are analysed on the disjoint union.
    #[arg(long)]
    model2: Option<PathBuf>,
    /// First initial distribution: a JSON file or `state:NAME`.
    #[arg(long)]
    pi1: String,
    /// Second initial distribution: a JSON file or `state:NAME`.
    #[arg(long)]
    pi2: String,
}

#[derive(Subcommand)]
enum Command {
    /// Check a chain file against the well-formedness conditions.
    Validate { model: PathBuf },
    /// Probability of one word.
    Prob {
        #[command(flatten)]
        input: Single,
        /// Labels separated by spaces or commas; empty for the empty word.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Probability of the words longer than n.
    Tail {
        #[command(flatten)]
        input: Single,
        #[arg(short = 'n')]
        n: usize,
    },
    /// Exact distance of an acyclic chain pair.
    Exact {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Exact sum of k-th powers of word probability differences (acyclic).
    Lk {
        #[command(flatten)]
        pair: Pair,
        #[arg(short = 'k')]
        k: u32,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Decide whether the distance reaches (or with --strict, exceeds) tau.
    Threshold {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        tau: String,
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Decide whether both distributions coincide (cyclic chains allowed).
    Equiv {
        #[command(flatten)]
        pair: Pair,
    },
    /// Monte Carlo estimate within eps with probability 1 - delta (acyclic).
    Sample {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        delta: String,
        /// A 64-bit seed, or `random` to draw one (recorded in the report).
        #[arg(long, default_value_t = DEFAULT_SEED.to_string())]
        seed: String,
    },
    /// Deterministic approximation within eps/2 (cyclic chains allowed).
    Bounded {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Build the chain pair encoding the accepted words of length n.
    FromNfa {
        nfa: PathBuf,
        #[arg(short = 'n')]
        n: u32,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
        cap: usize,
    },
    /// Build the chain pair encoding the emptiness question of a PA.
    FromPa {
        pa: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Count the accepted words of length n.
    CountNfa {
        nfa: PathBuf,
        #[arg(short = 'n')]
        n: u32,
        #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
        cap: usize,
    },
    /// Recover the accepted-word count from an approximate distance.
    ExtractCount {
        #[arg(long)]
        y: String,
        #[arg(long = "d-tilde")]
        d_tilde: String,
        #[arg(short = 'n')]
        n: u32,
        #[arg(short = 'k')]
        k: u64,
        #[arg(short = 's')]
        s: u64,
    },
    /// Search for a word accepted with probability above 1/2.
    PaWitness {
        pa: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
}

enum Failure {
    Core(Error),
    /// Unreadable or unwritable file.
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 3,
            Failure::Core(Error::Parse(_)) => 3,
            Failure::Core(e) if e.is_resource_limit() => 2,
            Failure::Core(Error::LengthExceeded { .. }) => 2,
            Failure::Core(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type Outcome = Result<(Report, u8), Failure>;

fn read_file(manifest: &mut RunManifest, role: &str, path: &Path) -> Result<String, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    manifest.input(role, &path.display().to_string(), &bytes);
    String::from_utf8(bytes).map_err(|_| Failure::Io(format!("{} is not UTF-8", path.display())))
}

fn load_distribution(
    manifest: &mut RunManifest,
    role: &str,
    lmc: &Lmc,
    arg: &str,
) -> Result<InitialDistribution, Failure> {
    if let Some(name) = arg.strip_prefix("state:") {
        manifest.param(role, arg);
        return lmc.dirac(name).map_err(|e| Failure::Core(Error::Parse(e.to_string())));
    }
    let text = read_file(manifest, role, Path::new(arg))?;
    Ok(read_distribution(lmc, &text)?)
}

fn load_single(manifest: &mut RunManifest, input: &Single) -> Result<(Lmc, InitialDistribution), Failure> {
    let lmc = read_lmc(&read_file(manifest, "model", &input.model)?)?;
    let pi = load_distribution(manifest, "pi1", &lmc, &input.pi1)?;
    Ok((lmc, pi))
}

fn load_pair(
    manifest: &mut RunManifest,
    pair: &Pair,
) -> Result<(Lmc, InitialDistribution, InitialDistribution), Failure> {
    let lmc = read_lmc(&read_file(manifest, "model", &pair.model)?)?;
    let pi1 = load_distribution(manifest, "pi1", &lmc, &pair.pi1)?;
    match &pair.model2 {
        None => {
            let pi2 = load_distribution(manifest, "pi2", &lmc, &pair.pi2)?;
            Ok((lmc, pi1, pi2))
        }
        Some(path) => {
            let other = read_lmc(&read_file(manifest, "model2", path)?)?;
            let pi2 = load_distribution(manifest, "pi2", &other, &pair.pi2)?;
            Ok(Lmc::disjoint_union(&lmc, &pi1, &other, &pi2)?)
        }
    }
}

fn param_rational(manifest: &mut RunManifest, key: &str, text: &str) -> Result<Rational, Failure> {
    manifest.param(key, text);
    parse_rational(text).map_err(|e| Failure::Core(Error::Parse(format!("--{key}: {e}"))))
}

fn word_list(lmc: &Lmc, words: &[Vec<usize>]) -> Vec<String> {
    words.iter().map(|w| lmc.format_word(w)).collect()
}

fn write_reduction(dir: &Path, out: &ReductionOutput, report: &mut Report) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    let files = [
        ("lmc.json", write_lmc(&out.lmc)),
        ("pi1.json", write_distribution(&out.lmc, &out.pi1)),
        ("pi2.json", write_distribution(&out.lmc, &out.pi2)),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
        written.push(path.display().to_string());
    }
    report.list("files", written);
    report.text("states", out.lmc.num_states());
    Ok(())
}

fn run(command: &Command) -> Outcome {
    let ok = |r: Report| Ok((r, 0));
    match command {
        Command::Validate { model } => {
            let mut m = RunManifest::new("validate");
            let lmc = read_lmc_unchecked(&read_file(&mut m, "model", model)?)?;
            let violations: Vec<String> = lmc.validate().iter().map(|v| v.to_string()).collect();
            let mut r = Report::new(m);
            r.text("states", lmc.num_states()).text("labels", lmc.alphabet().len());
            r.text("acyclic", lmc.is_acyclic());
            r.text("valid", violations.is_empty());
            let code = if violations.is_empty() { 0 } else { 1 };
            r.list("violations", violations);
            Ok((r, code))
        }
        Command::Prob { input, word } => {
            let mut m = RunManifest::new("prob");
            m.param("word", word);
            let (lmc, pi) = load_single(&mut m, input)?;
            let w = lmc.parse_word(word)?;
            let p = lmc.word_probability(&pi, &w)?;
            let mut r = Report::new(m);
            r.text("word", lmc.format_word(&w)).rational("probability", &p);
            ok(r)
        }
        Command::Tail { input, n } => {
            let mut m = RunManifest::new("tail");
            m.param("n", n);
            let (lmc, pi) = load_single(&mut m, input)?;
            let t = lmc.tail_mass(&pi, *n)?;
            let mut r = Report::new(m);
            r.rational("tail_mass", &t);
            ok(r)
        }
        Command::Exact { pair, budget } => {
            let mut m = RunManifest::new("exact");
            m.param("budget", budget);
            let (lmc, p1, p2) = load_pair(&mut m, pair)?;
            let rep = tv_distance_acyclic(&lmc, &p1, &p2, *budget)?;
            let mut r = Report::new(m);
            r.rational("distance", &rep.distance);
            r.text("support_words", rep.enumerated_words);
            r.text("max_length", rep.max_len);
            r.text("nodes_visited", rep.nodes_visited);
            r.text("witness_words", rep.witness.word_count);
            r.rational("witness_mass_pi1", &rep.witness.mass1);
            r.rational("witness_mass_pi2", &rep.witness.mass2);
            if let Some(words) = rep.witness.words.filter(|w| w.len() <= MAX_LISTED_WORDS) {
                r.list("witness", word_list(&lmc, &words));
            }
            ok(r)
        }
        Command::Lk { pair, k, budget } => {
            let mut m = RunManifest::new("lk");
            m.param("k", k);
            m.param("budget", budget);
            let (lmc, p1, p2) = load_pair(&mut m, pair)?;
            let v = lk_distance_acyclic(&lmc, &p1, &p2, *k, *budget)?;
            let mut r = Report::new(m);
            r.rational("lk_sum", &v);
            ok(r)
        }
        Command::Threshold { pair, tau, strict, budget } => {
            let mut m = RunManifest::new("threshold");
            let tau = param_rational(&mut m, "tau", tau)?;
            m.param("strict", strict);
            m.param("budget", budget);
            let (lmc, p1, p2) = load_pair(&mut m, pair)?;
            let c = threshold_decide_acyclic(&lmc, &p1, &p2, &tau, *strict, *budget)?;
            let mut r = Report::new(m);
            let relation = if *strict { ">" } else { ">=" };
            r.text("question", format!("distance {relation} tau"));
            r.rational("tau", &c.tau);
            r.text("decision", c.decision);
            r.text("common_denominator", &c.denominator_product);
            r.text("max_length", c.max_len);
            r.text("lhs", &c.lhs_integer);
            r.text("rhs", &c.rhs_integer);
            ok(r)
        }
        Command::Equiv { pair } => {
            let mut m = RunManifest::new("equiv");
            let (lmc, p1, p2) = load_pair(&mut m, pair)?;
            let w = distinguishing_word(&lmc, &p1, &p2)?;
            let mut r = Report::new(m);
            match w {
                None => {
                    r.text("result", "equivalent");
                }
                Some(w) => {
                    r.text("result", "not equivalent");
                    r.text("distinguishing_word", lmc.format_word(&w));
                    r.rational("pi1_word", &lmc.word_probability(&p1, &w)?);
                    r.rational("pi2_word", &lmc.word_probability(&p2, &w)?);
                }
            }
            ok(r)
        }
        Command::Sample { pair, eps, delta, seed } => {
            let mut m = RunManifest::new("sample");
            let eps = param_rational(&mut m, "eps", eps)?;
            let delta = param_rational(&mut m, "delta", delta)?;
            let seed = match seed.as_str() {
                "random" => rand::rng().next_u64(),
                s => s
                    .parse::<u64>()
                    .map_err(|_| Failure::Core(Error::Parse(format!("--seed: {s:?} is not a 64-bit integer or `random`"))))?,
            };
            m.param("seed", seed);
            m.param("rng", RNG_ALGORITHM);
            let (lmc, p1, p2) = load_pair(&mut m, pair)?;
            let est = tv_sample_acyclic(&lmc, &p1, &p2, &eps, &delta, seed)?;
            let mut r = Report::new(m);
            r.rational("estimate", &est.estimate);
            r.rational("p_hat_1", &est.p_hat_1);
            r.rational("p_hat_2", &est.p_hat_2);
            r.text("samples_per_side", est.samples_per_side);
            ok(r)
        }
        Command::Bounded { pair, eps, budget } => {
            let mut m = RunManifest::new("bounded");
            let eps = param_rational(&mut m, "eps", eps)?;
            m.param("budget", budget);
            let (lmc, p1, p2) = load_pair(&mut m, pair)?;
            let est = tv_bounded(&lmc, &p1, &p2, &eps, *budget)?;
            let mut r = Report::new(m);
            r.rational("estimate", &est.estimate);
            r.rational("guaranteed_error", &(&eps / tvd_core::rational::int(2)));
            r.rational("s1", &est.s1);
            r.rational("s2", &est.s2);
            r.text("length_bound", est.n);
            r.text(
                "length_bound_method",
                match est.length_method {
                    LengthMethod::TailRecursion => "tail-mass recursion",
                    LengthMethod::ClosedForm => "closed form",
                },
            );
            r.text("precision_bits", est.k);
            r.text("words_enumerated", est.words_enumerated);
            r.text("nodes_visited", est.nodes_visited);
            ok(r)
        }
        Command::FromNfa { nfa, n, out_dir, cap } => {
            let mut m = RunManifest::new("from-nfa");
            m.param("n", n);
            m.param("cap", cap);
            m.param("out_dir", out_dir.display());
            let nfa = read_nfa(&read_file(&mut m, "nfa", nfa)?)?;
            let out = reduce_nfa(&nfa, *n)?;
            let count = count_accepted(&nfa, *n, *cap);
            let mut r = Report::new(m);
            write_reduction(out_dir, &out, &mut r)?;
            let ReductionKind::Nfa { y, run_sum, k, s, .. } = &out.kind else {
                unreachable!("NFA reduction");
            };
            r.rational("y", y);
            r.text("run_sum", run_sum);
            r.text("k", k).text("s", s).text("n", n);
            r.text("formula", "distance = y + (k^n - accepted) / (k^n * s^n)");
            match count {
                Ok(c) => {
                    r.text("accepted", &c);
                    r.rational("distance", &out.certified_distance(&c).expect("NFA reduction"));
                }
                Err(e) if e.is_resource_limit() => {
                    r.text("accepted", format!("not computed ({e})"));
                }
                Err(e) => return Err(e.into()),
            }
            ok(r)
        }
        Command::FromPa { pa, out_dir } => {
            let mut m = RunManifest::new("from-pa");
            m.param("out_dir", out_dir.display());
            let pa = read_pa(&read_file(&mut m, "pa", pa)?)?;
            let out = reduce_pa(&pa)?;
            let mut r = Report::new(m);
            write_reduction(out_dir, &out, &mut r)?;
            let ReductionKind::Pa { bound, accept_mass } = &out.kind else {
                unreachable!("PA reduction");
            };
            r.rational("bound", bound);
            r.rational("pi2_accept_mass", accept_mass);
            r.text("meaning", "distance > bound iff some word is accepted with probability > 1/2");
            ok(r)
        }
        Command::CountNfa { nfa, n, cap } => {
            let mut m = RunManifest::new("count-nfa");
            m.param("n", n);
            m.param("cap", cap);
            let nfa = read_nfa(&read_file(&mut m, "nfa", nfa)?)?;
            let c = count_accepted(&nfa, *n, *cap)?;
            let mut r = Report::new(m);
            r.text("accepted", &c);
            ok(r)
        }
        Command::ExtractCount { y, d_tilde, n, k, s } => {
            let mut m = RunManifest::new("extract-count");
            let y = param_rational(&mut m, "y", y)?;
            let d = param_rational(&mut m, "d-tilde", d_tilde)?;
            m.param("n", n);
            m.param("k", k);
            m.param("s", s);
            let u = extract_count(&y, &d, *n, *k, *s)?;
            let mut r = Report::new(m);
            r.text("accepted", u);
            ok(r)
        }
        Command::PaWitness { pa, max_len } => {
            let mut m = RunManifest::new("pa-witness");
            m.param("max_len", max_len);
            let pa = read_pa(&read_file(&mut m, "pa", pa)?)?;
            let w = emptiness_witness_search(&pa, *max_len);
            let mut r = Report::new(m);
            match w {
                Some(w) => {
                    let text = if w.is_empty() {
                        "ε".to_string()
                    } else {
                        w.iter().map(|&a| pa.alphabet()[a].as_str()).collect::<Vec<_>>().join(" ")
                    };
                    r.text("witness", text);
                    r.rational("acceptance_probability", &pa_accept_prob(&pa, &w)?);
                }
                None => {
                    r.text("witness", "none");
                    r.text(
                        "note",
                        format!("no word of length <= {max_len} is accepted with probability > 1/2; longer words are not excluded"),
                    );
                }
            }
            ok(r)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match run(&cli.command) {
        Ok((report, code)) => {
            print!("{}", report.render(cli.json));
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
