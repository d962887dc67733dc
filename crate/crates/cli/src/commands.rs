//! Subcommand bodies. Paths in, files and summaries out.

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use ttns::io::{read_state, read_tree, write_state, write_ttns, TreeFile};
use ttns::network::exact_decompose;
use ttns::targets::{ground_state, make_named, HamiltonianSpec, NamedState};
use ttns::{Budget, DenseState, Relabeling, TreeGraph, TruncationPlan};

use crate::json::to_canonical;
use crate::report::{certify, profile, BoundsReport, CertifyInput, ProfileReport};
use crate::{CliError, Result};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_dims(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| usage(format!("bad dimension {t:?}"))))
        .collect()
}

pub fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    let alphas: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("bad alpha {t:?}"))))
        .collect::<Result<_>>()?;
    if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
        return Err(CliError::Core(ttns::Error::NonpositiveAlpha(*a)));
    }
    Ok(alphas)
}

/// `a..b` (half open) or `a..=b`.
pub fn parse_seed_range(text: &str) -> Result<Range<u64>> {
    let bad = || usage(format!("bad seed range {text:?}, expected a..b"));
    let (a, b, inclusive) = match text.split_once("..=") {
        Some((a, b)) => (a, b, true),
        None => {
            let (a, b) = text.split_once("..").ok_or_else(bad)?;
            (a, b, false)
        }
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    Ok(a..if inclusive { b + 1 } else { b })
}

/// How the truncation is specified on the command line.
#[derive(Debug, Clone, Default)]
pub struct PlanArgs {
    /// One cap for every edge, or a comma-separated list per edge.
    pub caps: Option<String>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub plan: Option<PathBuf>,
    /// `even` (default) or `entropy`, for `delta`.
    pub split: Option<String>,
}

impl PlanArgs {
    pub fn resolve(&self, n_edges: usize) -> Result<TruncationPlan> {
        let given = [self.caps.is_some(), self.eps.is_some(), self.delta.is_some(), self.plan.is_some()];
        match given.iter().filter(|&&g| g).count() {
            0 => return Ok(TruncationPlan::Caps(vec![usize::MAX; n_edges])),
            1 => {}
            _ => return Err(usage("give at most one of --caps, --eps, --delta, --plan")),
        }
        let check = |x: f64| if x > 0.0 && x < 1.0 { Ok(x) } else { Err(CliError::Core(ttns::Error::BadEps(x))) };
        if let Some(c) = &self.caps {
            let caps = parse_dims(c)?;
            return Ok(match caps.as_slice() {
                [one] => TruncationPlan::uniform(n_edges, *one),
                _ => TruncationPlan::Caps(caps),
            });
        }
        if let Some(e) = self.eps {
            return Ok(TruncationPlan::Budget(Budget::PerEdge(check(e)?)));
        }
        if let Some(d) = self.delta {
            let d = check(d)?;
            return match self.split.as_deref() {
                None | Some("even") => Ok(TruncationPlan::Budget(Budget::Total(d))),
                Some("entropy") => Ok(TruncationPlan::Budget(Budget::TotalEntropyWeighted(d))),
                Some(other) => Err(usage(format!("unknown split {other:?}"))),
            };
        }
        let path = self.plan.as_ref().unwrap();
        Ok(TruncationPlan::from_json(&fs::read_to_string(path)?, n_edges)?)
    }
}

/// Reads a state and a tree file; the state is taken to be in the tree
/// file's original labels and is returned in canonical labels.
pub fn load_inputs(state_path: &Path, tree_path: &Path) -> Result<(DenseState, TreeGraph, Relabeling)> {
    let state = read_state(state_path)?;
    let (tree, relabeling) = read_tree(tree_path)?;
    let original_dims: Vec<usize> = (1..=tree.n()).map(|old| tree.dim(relabeling.new_label(old))).collect();
    if state.dims() != original_dims.as_slice() {
        return Err(CliError::Core(ttns::Error::DimMismatch(format!(
            "state dims {:?} vs tree dims {:?}",
            state.dims(),
            original_dims
        ))));
    }
    let state = state.relabel(&relabeling)?;
    Ok((state, tree, relabeling))
}

#[derive(Debug, Clone)]
pub struct GenArgs {
    pub kind: String,
    pub dims: Option<Vec<usize>>,
    pub tree: Option<PathBuf>,
    pub spec: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
struct GroundSidecar {
    energy: f64,
    gap: f64,
    degenerate: bool,
    residual: f64,
    /// Canonical tree the state's site order refers to.
    tree: TreeFile,
    tree_file: String,
}

/// Writes the requested state. Returns a one-line summary.
pub fn gen(args: &GenArgs) -> Result<String> {
    if args.kind == "ground" {
        let spec_path = args.spec.as_ref().ok_or_else(|| usage("gen ground needs --spec"))?;
        let text = fs::read_to_string(spec_path)?;
        let (spec, relabeling) = HamiltonianSpec::from_json(&text, spec_path.parent())?;
        let gs = ground_state(&spec)?;
        write_state(&args.out, &gs.state)?;
        let tree_path = args.out.with_extension("tree.json");
        let canonical = TreeFile::canonical(&spec.tree, &Relabeling::identity(spec.tree.n()));
        fs::write(&tree_path, to_canonical(&canonical))?;
        let sidecar = GroundSidecar {
            energy: gs.energy,
            gap: gs.gap,
            degenerate: gs.degenerate,
            residual: gs.residual,
            tree: TreeFile::canonical(&spec.tree, &relabeling),
            tree_file: tree_path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        };
        fs::write(args.out.with_extension("meta.json"), to_canonical(&sidecar))?;
        let warn = if gs.degenerate { " (degenerate ground space)" } else { "" };
        return Ok(format!(
            "ground state on {} sites: energy {:.12}, gap {:.6e}{warn}",
            spec.tree.n(),
            gs.energy,
            gs.gap
        ));
    }
    let kind: NamedState = args.kind.parse()?;
    let dims = match (&args.dims, &args.tree) {
        (Some(d), None) => d.clone(),
        (None, Some(t)) => TreeFile::parse(&fs::read_to_string(t)?)?.dims,
        (Some(_), Some(_)) => return Err(usage("give --dims or --tree, not both")),
        (None, None) => return Err(usage("gen needs --dims or --tree")),
    };
    let state = make_named(kind, &dims, args.seed)?;
    write_state(&args.out, &state)?;
    let nonzero = state.amplitudes().iter().filter(|a| a.norm() > 0.0).count();
    Ok(format!("{} amplitudes ({nonzero} nonzero) written to {}", state.amplitudes().len(), args.out.display()))
}

/// Exact decomposition into a container at `out`; returns the per-edge table.
pub fn decompose(state_path: &Path, tree_path: &Path, out: &Path) -> Result<String> {
    let (state, tree, relabeling) = load_inputs(state_path, tree_path)?;
    let ttns = exact_decompose(&state, &tree)?;
    let blob = write_ttns(out, &ttns)?;
    let spectra = ttns.spectra.as_ref().expect("exact decomposition stores spectra");
    let mut text = String::new();
    if !relabeling.is_identity() {
        text.push_str(&format!("labeling (original -> canonical): {:?}\n", relabeling.old_to_new));
    }
    text.push_str(&format!("{:>5} {:>7} {:>6} {:>24} {:>24}\n", "edge", "parent", "M", "lambda_max", "lambda_min"));
    for i in tree.edges() {
        let m = ttns.bond_dim(i);
        let c = &spectra[i - 1].coefficients;
        text.push_str(&format!(
            "{:>5} {:>7} {:>6} {:>24.16e} {:>24.16e}\n",
            i,
            tree.parent(i),
            m,
            c.first().copied().unwrap_or(0.0),
            c.get(m.saturating_sub(1)).copied().unwrap_or(0.0)
        ));
    }
    text.push_str(&format!("wrote {} and {}\n", out.display(), blob.display()));
    Ok(text)
}

pub struct CertifyArgs<'a> {
    pub plan: &'a PlanArgs,
    pub alphas: &'a [f64],
    pub full_spectra: bool,
}

pub fn certify_files(state_path: &Path, tree_path: &Path, args: &CertifyArgs) -> Result<BoundsReport> {
    let (state, tree, relabeling) = load_inputs(state_path, tree_path)?;
    let plan = args.plan.resolve(tree.n() - 1)?;
    Ok(certify(&CertifyInput {
        state: &state,
        tree: &tree,
        relabeling: &relabeling,
        plan: &plan,
        alphas: args.alphas,
        full_spectra: args.full_spectra,
    })?)
}

/// Random instance for one seed: the given tree (or a random qubit tree with
/// `sites` vertices) and a random state.
pub fn random_instance(seed: u64, sites: usize, tree: Option<&(TreeGraph, Relabeling)>) -> Result<(DenseState, TreeGraph, Relabeling)> {
    let (tree, relabeling) = match tree {
        Some((t, r)) => (t.clone(), r.clone()),
        None => {
            if sites < 2 {
                return Err(usage("--sites must be at least 2"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = TreeGraph::random(&vec![2; sites], &mut rng).map_err(ttns::Error::from)?;
            (t, Relabeling::identity(sites))
        }
    };
    let state = make_named(NamedState::Random, tree.dims(), Some(seed))?;
    Ok((state, tree, relabeling))
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub seed: u64,
    pub verdict: bool,
    pub path: Option<PathBuf>,
}

/// One report per seed, written to `out_dir/report-<seed>.json` when given.
/// Results come back in seed order whatever the worker scheduling.
pub fn certify_batch(
    seeds: Range<u64>,
    sites: usize,
    tree_path: Option<&Path>,
    args: &CertifyArgs,
    out_dir: Option<&Path>,
) -> Result<Vec<BatchOutcome>> {
    let fixed = tree_path.map(read_tree).transpose()?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }
    let seeds: Vec<u64> = seeds.collect();
    seeds
        .par_iter()
        .map(|&seed| {
            let (state, tree, relabeling) = random_instance(seed, sites, fixed.as_ref())?;
            let plan = args.plan.resolve(tree.n() - 1)?;
            let report = certify(&CertifyInput {
                state: &state,
                tree: &tree,
                relabeling: &relabeling,
                plan: &plan,
                alphas: args.alphas,
                full_spectra: args.full_spectra,
            })?;
            let path = match out_dir {
                Some(dir) => {
                    let p = dir.join(format!("report-{seed}.json"));
                    fs::write(&p, report.to_json())?;
                    Some(p)
                }
                None => None,
            };
            Ok(BatchOutcome { seed, verdict: report.verdict, path })
        })
        .collect()
}

pub fn profile_files(state_path: &Path, tree_path: &Path, alphas: &[f64], eps: f64) -> Result<ProfileReport> {
    let (state, tree, _) = load_inputs(state_path, tree_path)?;
    Ok(profile(&state, &tree, alphas, eps)?)
}
