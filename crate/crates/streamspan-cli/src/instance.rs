//! Generator specs of the form `family:arg:arg`.

use streamspan::instances::{complete, conjectured_hard, cut_bad_instance, cycle, gnp, layered_custom, layered_instance, path, star};
use streamspan::{Error, Result, UnweightedGraph};

/// Families accepted by `--gen` and `gen`.
pub const FAMILIES: &str = "gnp:N:P, cycle:N, path:N, complete:N, star:LEAVES, layered:N, layered:A:LAYERS, cut-bad:N, hard:N:D";

fn arg<T: std::str::FromStr>(parts: &[&str], i: usize, spec: &str) -> Result<T> {
    parts
        .get(i)
        .ok_or_else(|| Error::Parameter(format!("generator spec {spec:?} is missing argument {i}")))?
        .parse()
        .map_err(|_| Error::Parameter(format!("generator spec {spec:?} has a bad argument {i}")))
}

/// Builds the graph named by `spec`; randomized families use `seed`.
pub fn generate(spec: &str, seed: u64) -> Result<UnweightedGraph> {
    let parts: Vec<&str> = spec.split(':').collect();
    let want = |k: usize| -> Result<()> {
        if parts.len() == k + 1 {
            Ok(())
        } else {
            Err(Error::Parameter(format!("generator spec {spec:?} takes {k} argument(s)")))
        }
    };
    let g = match parts[0] {
        "gnp" => {
            want(2)?;
            let p: f64 = arg(&parts, 2, spec)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("edge probability {p} outside [0, 1]")));
            }
            gnp(arg(&parts, 1, spec)?, p, seed)
        }
        "cycle" => {
            want(1)?;
            let n: usize = arg(&parts, 1, spec)?;
            if n < 3 {
                return Err(Error::Parameter("a cycle needs n >= 3".into()));
            }
            cycle(n)
        }
        "path" => {
            want(1)?;
            path(arg(&parts, 1, spec)?)
        }
        "complete" => {
            want(1)?;
            complete(arg(&parts, 1, spec)?)
        }
        "star" => {
            want(1)?;
            star(arg(&parts, 1, spec)?)
        }
        "layered" if parts.len() == 3 => layered_custom(arg(&parts, 1, spec)?, arg(&parts, 2, spec)?)?.graph,
        "layered" => {
            want(1)?;
            layered_instance(arg(&parts, 1, spec)?)?.graph
        }
        "cut-bad" => {
            want(1)?;
            cut_bad_instance(arg(&parts, 1, spec)?)?.graph
        }
        "hard" => {
            want(2)?;
            conjectured_hard(arg(&parts, 1, spec)?, arg(&parts, 2, spec)?, seed)?.graph
        }
        other => return Err(Error::Parameter(format!("unknown family {other:?}; expected one of {FAMILIES}"))),
    };
    Ok(g)
}
