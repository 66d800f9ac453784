//! The JSON run specification and its merge with command-line flags.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use spoke_core::functions::{BuildOptions, BuiltinObjective};
use spoke_core::{RunConfig, SearchSpace, VarTrans, VarType};

use crate::RunArgs;

/// A run configuration file: every `RunConfig` field at the top level, plus
/// the objective and search-space description.
#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct RunSpecFile {
    pub function: Option<String>,
    /// Natural-scale `[lower, upper]` per dimension; defaults to the function's box.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// `float`, `int` or `factor` per dimension.
    pub var_type: Option<Vec<String>>,
    /// `id` or `log10` per dimension.
    pub var_trans: Option<Vec<String>>,
    pub var_name: Option<Vec<String>>,
    /// Scalarization weights for multi-objective functions.
    pub weights: Option<Vec<f64>>,
    /// Problem dimension for functions that accept several.
    pub dims: Option<usize>,
    pub noise_sd: Option<f64>,
    pub history: Option<PathBuf>,
    #[serde(flatten)]
    pub config: RunConfig,
}

const SPEC_KEYS: [&str; 10] = [
    "function", "bounds", "var_type", "var_trans", "var_name", "weights", "dims", "noise_sd", "history", "seed",
];

impl RunSpecFile {
    pub fn load(path: &Path) -> Result<(Self, bool), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    /// Parses a specification and reports whether it set `seed`. Unknown keys
    /// are rejected (serde cannot do this through a flattened struct).
    pub fn parse(text: &str) -> Result<(Self, bool), String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("config is not valid JSON: {e}"))?;
        let obj = value.as_object().ok_or("config must be a JSON object")?;
        let known: BTreeSet<String> = serde_json::to_value(RunConfig::default())
            .expect("config serializes")
            .as_object()
            .expect("config is an object")
            .keys()
            .cloned()
            .chain(SPEC_KEYS.iter().map(|s| s.to_string()))
            .collect();
        if let Some(bad) = obj.keys().find(|k| !known.contains(*k)) {
            return Err(format!("unknown config key `{bad}`"));
        }
        let has_seed = obj.contains_key("seed");
        let spec = serde_json::from_value(value).map_err(|e| format!("invalid config: {e}"))?;
        Ok((spec, has_seed))
    }
}

pub fn parse_bounds(s: &str) -> Result<Vec<(f64, f64)>, String> {
    s.split(',')
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(':')
                .ok_or_else(|| format!("bound `{pair}` is not of the form lo:hi"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
            Ok((lo, hi))
        })
        .collect()
}

fn parse_var_type(s: &str, (lo, hi): (f64, f64)) -> Result<VarType, String> {
    match s {
        "float" => Ok(VarType::Float),
        "int" => Ok(VarType::Int),
        "factor" => Ok(VarType::Factor {
            levels: (hi - lo).round() as usize + 1,
        }),
        other => Err(format!("unknown var_type `{other}` (expected float, int or factor)")),
    }
}

fn parse_var_trans(s: &str) -> Result<VarTrans, String> {
    match s {
        "id" | "identity" | "none" => Ok(VarTrans::Identity),
        "log10" => Ok(VarTrans::Log10),
        other => Err(format!("unknown var_trans `{other}` (expected id or log10)")),
    }
}

/// Everything `run` needs, after flags have been laid over the file.
pub struct Resolved {
    pub objective: BuiltinObjective,
    pub space: SearchSpace,
    pub config: RunConfig,
    pub history: Option<PathBuf>,
}

pub fn resolve(args: &RunArgs, env_seed: Option<u64>) -> Result<Resolved, String> {
    let (mut spec, file_seed) = match &args.config {
        Some(path) => RunSpecFile::load(path)?,
        None => (RunSpecFile::default(), false),
    };
    let cfg = &mut spec.config;
    macro_rules! set {
        ($field:ident) => {
            if let Some(v) = args.$field.clone() {
                cfg.$field = v;
            }
        };
    }
    set!(max_iter);
    set!(n_initial);
    set!(acquisition);
    set!(n_jobs);
    set!(eval_batch_size);
    set!(fun_repeats);
    set!(ocba_delta);
    set!(restart_after_n);
    set!(n_infill);
    if let Some(w) = args.window_size {
        cfg.window_size = Some(w);
    }
    if let Some(t) = args.max_time {
        cfg.max_time = Some(t);
    }
    if args.no_inject_best {
        cfg.restart_inject_best = false;
    }
    if let Some(p) = &args.log {
        cfg.log_path = Some(p.clone());
    }
    if args.verbose {
        cfg.verbose = true;
    }
    cfg.seed = match (args.seed, file_seed, env_seed) {
        (Some(s), _, _) => s,
        (None, true, _) => cfg.seed,
        (None, false, Some(s)) => s,
        (None, false, None) => 0,
    };

    let name = args
        .function
        .clone()
        .or(spec.function.clone())
        .ok_or("no objective: pass --function or set `function` in the config")?;
    let bounds = match &args.bounds {
        Some(b) => Some(parse_bounds(b)?),
        None => spec.bounds.clone(),
    };
    let weights = match &args.weights {
        Some(w) => Some(
            w.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad weight `{v}`")))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => spec.weights.clone(),
    };
    let opts = BuildOptions {
        dims: args.dims.or(spec.dims).or(bounds.as_ref().map(Vec::len)),
        weights,
        noise_sd: args.noise_sd.or(spec.noise_sd).unwrap_or(0.1),
        seed: spec.config.seed,
        ..Default::default()
    };
    let objective = BuiltinObjective::new(&name, &opts).map_err(|e| e.to_string())?;
    let bounds = bounds.unwrap_or_else(|| objective.bounds().to_vec());
    if bounds.len() != objective.dims() {
        return Err(format!("{} bounds given, {name} has {} dimensions", bounds.len(), objective.dims()));
    }
    let d = bounds.len();
    let var_type = match &spec.var_type {
        Some(t) if t.len() != d => return Err(format!("var_type has {} entries, expected {d}", t.len())),
        Some(t) => t.iter().zip(&bounds).map(|(s, b)| parse_var_type(s, *b)).collect::<Result<_, _>>()?,
        None => vec![VarType::Float; d],
    };
    let var_trans = match &spec.var_trans {
        Some(t) if t.len() != d => return Err(format!("var_trans has {} entries, expected {d}", t.len())),
        Some(t) => t.iter().map(|s| parse_var_trans(s)).collect::<Result<_, _>>()?,
        None => vec![VarTrans::Identity; d],
    };
    let names = spec
        .var_name
        .clone()
        .unwrap_or_else(|| (0..d).map(|i| format!("x{i}")).collect());
    let space = SearchSpace::new(bounds, var_type, var_trans, names).map_err(|e| e.to_string())?;
    spec.config.validate().map_err(|e| e.to_string())?;
    Ok(Resolved {
        objective,
        space,
        history: args.history.clone().or(spec.history),
        config: spec.config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_syntax() {
        assert_eq!(parse_bounds("-5:5,0:1.5").unwrap(), vec![(-5.0, 5.0), (0.0, 1.5)]);
        assert!(parse_bounds("-5..5").is_err());
        assert!(parse_bounds("a:1").is_err());
    }

    #[test]
    fn spec_file_mixes_config_and_problem_keys() {
        let (spec, has_seed) = RunSpecFile::parse(
            r#"{"function": "sphere", "bounds": [[-1, 1], [0, 10]], "var_type": ["float", "int"],
                "max_iter": 30, "acquisition": "ei", "seed": 7}"#,
        )
        .unwrap();
        assert!(has_seed);
        assert_eq!(spec.function.as_deref(), Some("sphere"));
        assert_eq!(spec.config.max_iter, 30);
        assert_eq!(spec.config.seed, 7);
        assert_eq!(spec.config.n_initial, RunConfig::default().n_initial);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunSpecFile::parse(r#"{"function": "sphere", "max_iters": 3}"#).unwrap_err();
        assert!(err.contains("max_iters"));
    }

    #[test]
    fn factor_levels_follow_bounds() {
        assert_eq!(parse_var_type("factor", (0.0, 4.0)).unwrap(), VarType::Factor { levels: 5 });
        assert!(parse_var_type("bool", (0.0, 1.0)).is_err());
    }
}
