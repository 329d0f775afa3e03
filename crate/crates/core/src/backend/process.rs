use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::mps::{sanitize_name, write_mps};
use super::solution::parse_solution;
use super::{clean_primal, Backend, BackendCapabilities, BackendError, SolveOptions, SolveResult, Status};
use crate::formulation::ModelProblem;

/// Full command template, e.g. `mysolver --in {input} --out {output}`.
pub const ENV_SOLVER_CMD: &str = "UCET_SOLVER_CMD";
/// Path of an executable taking `INPUT OUTPUT TIME_LIMIT GAP`.
pub const ENV_SOLVER: &str = "UCET_SOLVER";

/// The SCIP shim shipped in `tools/`.
pub fn default_shim_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tools/scip_solve.py")
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// Runs an external solver through `sh -c` on an MPS file in a fresh temp
/// directory. The directory is removed after a clean run and kept when the
/// process fails or its output cannot be read.
#[derive(Debug, Clone)]
pub struct ProcessBackend {
    template: String,
    caps: BackendCapabilities,
    grace: Duration,
}

impl ProcessBackend {
    pub fn new(template: impl Into<String>) -> Self {
        ProcessBackend {
            template: template.into(),
            caps: BackendCapabilities::all(),
            grace: Duration::from_secs(30),
        }
    }

    /// `UCET_SOLVER_CMD`, then `UCET_SOLVER`, then the bundled SCIP shim.
    pub fn from_env() -> Self {
        if let Ok(t) = std::env::var(ENV_SOLVER_CMD) {
            if !t.trim().is_empty() {
                return Self::new(t);
            }
        }
        let exe = match std::env::var(ENV_SOLVER) {
            Ok(p) if !p.trim().is_empty() => shell_quote(&p),
            _ => format!("python3 {}", shell_quote(&default_shim_path().to_string_lossy())),
        };
        Self::new(format!("{exe} {{input}} {{output}} {{timelimit}} {{gap}}"))
    }

    pub fn with_capabilities(mut self, caps: BackendCapabilities) -> Self {
        self.caps = caps;
        self
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    fn command_line(&self, input: &Path, output: &Path, opts: &SolveOptions) -> String {
        self.template
            .replace("{input}", &shell_quote(&input.to_string_lossy()))
            .replace("{output}", &shell_quote(&output.to_string_lossy()))
            .replace("{timelimit}", &format!("{}", opts.time_limit))
            .replace("{gap}", &format!("{}", opts.rel_gap))
    }

    fn fail(dir: tempfile::TempDir, message: String) -> BackendError {
        let dir = dir.keep();
        log::warn!("solver run failed, files kept in {}", dir.display());
        BackendError::Process { message, dir }
    }
}

impl Backend for ProcessBackend {
    fn capabilities(&self) -> BackendCapabilities {
        self.caps.clone()
    }

    fn solve(&self, problem: &ModelProblem, opts: &SolveOptions) -> Result<SolveResult, BackendError> {
        opts.validate()?;
        let class = self.effective_class(problem, opts);
        if !self.caps.supports(class) {
            return Err(BackendError::Unsupported(class));
        }
        let relaxed;
        let problem = if opts.relax_integrality && problem.has_integers() {
            let mut p = problem.clone();
            p.relax();
            relaxed = p;
            &relaxed
        } else {
            problem
        };
        problem.check().map_err(BackendError::Output)?;

        let dir = tempfile::Builder::new()
            .prefix("ucet-solve-")
            .tempdir()
            .map_err(|e| BackendError::Io(e.to_string()))?;
        let input = dir.path().join("problem.mps");
        let output = dir.path().join("solution.txt");
        std::fs::write(&input, write_mps(problem)).map_err(|e| BackendError::Io(e.to_string()))?;
        let cmd = self.command_line(&input, &output, opts);
        if opts.verbosity > 0 {
            log::info!("running solver: {cmd}");
        }
        let log_file = std::fs::File::create(dir.path().join("solver.log")).map_err(|e| BackendError::Io(e.to_string()))?;
        let log_err = log_file.try_clone().map_err(|e| BackendError::Io(e.to_string()))?;

        let started = Instant::now();
        let mut child = match Command::new("sh")
            .arg("-c")
            .arg(&cmd)
            .stdin(Stdio::null())
            .stdout(log_file)
            .stderr(log_err)
            .spawn()
        {
            Ok(c) => c,
            Err(e) => return Err(Self::fail(dir, format!("cannot start '{cmd}': {e}"))),
        };
        let deadline = Duration::from_secs_f64(opts.time_limit) + self.grace;
        let exit = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if started.elapsed() > deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(Self::fail(dir, format!("solver exceeded {:.1} s and was killed", deadline.as_secs_f64())));
                }
                Ok(None) => std::thread::sleep(Duration::from_millis(2)),
                Err(e) => return Err(Self::fail(dir, format!("waiting on solver: {e}"))),
            }
        };
        let wall = started.elapsed().as_secs_f64();
        let diagnostics = || {
            let text = std::fs::read_to_string(dir.path().join("solver.log")).unwrap_or_default();
            let tail: Vec<&str> = text.lines().rev().take(5).collect();
            tail.into_iter().rev().collect::<Vec<_>>().join(" | ")
        };
        if !exit.success() {
            let msg = format!("'{cmd}' exited with {exit}: {}", diagnostics());
            return Err(Self::fail(dir, msg));
        }
        let text = match std::fs::read_to_string(&output) {
            Ok(t) => t,
            Err(e) => {
                let msg = format!("no solution file ({e}): {}", diagnostics());
                return Err(Self::fail(dir, msg));
            }
        };
        let raw = match parse_solution(&text) {
            Ok(r) => r,
            Err(e) => return Err(Self::fail(dir, e.to_string())),
        };

        let wants_primal = matches!(raw.status, Status::Optimal | Status::Feasible | Status::TimeLimit);
        let primal = if wants_primal && !raw.values.is_empty() {
            let mut values = Vec::with_capacity(problem.vars.len());
            let mut missing = 0;
            for v in &problem.vars {
                match raw.values.get(&sanitize_name(&v.name)) {
                    Some(x) => values.push(*x),
                    None => {
                        missing += 1;
                        values.push(0.0);
                    }
                }
            }
            if missing > 0 {
                log::warn!("{missing} variables missing from the solution file, set to 0");
            }
            let excess = clean_primal(problem, &mut values);
            if excess > 1e-6 {
                log::warn!("solver primal violated bounds by up to {excess:e}");
            }
            Some(values)
        } else {
            None
        };
        if wants_primal && primal.is_none() && raw.status != Status::TimeLimit {
            return Err(Self::fail(dir, format!("status {} without primal values", raw.status)));
        }
        let objective = primal.as_ref().map(|x| problem.objective_value(x));
        if let (Some(a), Some(b)) = (objective, raw.objective) {
            if (a - b).abs() > 1e-6 * a.abs().max(b.abs()).max(1.0) {
                log::warn!("recomputed objective {a} differs from reported {b}");
            }
        }
        if raw.status == Status::Error {
            log::warn!("solver reported an error: {}", raw.message.as_deref().unwrap_or("no message"));
        }
        Ok(SolveResult {
            status: raw.status,
            objective,
            reported_objective: raw.objective,
            primal,
            solve_time: if raw.solve_time > 0.0 { raw.solve_time } else { wall },
            message: raw.message,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{LinearConstraint, ObjSense, ProblemClass, QuadConstraint, Sense};

    #[test]
    fn unsupported_class_fails_before_launch() {
        let backend = ProcessBackend::new("touch /nonexistent/dir/marker")
            .with_capabilities(BackendCapabilities::new([ProblemClass::Lp]));
        let mut p = ModelProblem::new("q", ObjSense::Minimize);
        let x = p.add_var("x", 0.0, 1.0, false);
        p.quads.push(QuadConstraint {
            diag: [(x, 1.0)].into(),
            linear: Default::default(),
            rhs: 1.0,
            tag: "q".into(),
        });
        match backend.solve(&p, &SolveOptions::qcp()) {
            Err(BackendError::Unsupported(ProblemClass::Qcp)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scripted_solver_output_is_cleaned() {
        let mut p = ModelProblem::new("s", ObjSense::Minimize);
        let x = p.add_var("x", 0.0, 10.0, false);
        let y = p.add_var("y", 0.0, 1.0, true);
        p.objective.insert(x, 2.0);
        p.push_row(LinearConstraint::new("c", Sense::Ge, 3.0).with(x, 1.0).with(y, 1.0));
        let script = "printf 'status optimal\\nobjective 6\\nsolve_time 0.1\\nx 3.0000000001\\nmystery 4\\n' > {output}";
        let res = ProcessBackend::new(script).solve(&p, &SolveOptions::lp()).unwrap();
        let primal = res.primal.unwrap();
        assert_eq!(primal[y], 0.0);
        assert!((primal[x] - 3.0).abs() < 1e-9);
        assert!((res.objective.unwrap() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn failing_process_keeps_files() {
        let p = ModelProblem::new("f", ObjSense::Minimize);
        match ProcessBackend::new("echo boom >&2; exit 3").solve(&p, &SolveOptions::lp()) {
            Err(BackendError::Process { message, dir }) => {
                assert!(message.contains("boom"), "{message}");
                assert!(dir.join("problem.mps").exists());
                let _ = std::fs::remove_dir_all(dir);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
