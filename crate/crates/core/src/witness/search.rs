//! Seeded search over classical-mediator protocols.
//!
//! A pipeline alternates register–`A` and register–`B` steps, starting with
//! `A`. Grid pipelines draw every step from a fixed family of measurements
//! and label-conditioned rotations; sampled pipelines draw every step as a
//! random instrument. Both are reduced to the maximum negativity and CHSH
//! value of the final two-qubit state.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector2};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    apply_step_a, apply_step_b, final_ab_state, flip_b_if_one, kron, measure_z_and_record, named_ket, pure_qubit,
    Branch, EntanglementReport, HybridState, Instrument, LocalStepA, LocalStepB, Qubit, WitnessError,
};
use crate::heisenberg::{pauli_c64, C64};
use crate::pauli::Letter;

pub const MAX_STEPS: usize = 4;
/// Kraus rank of sampled instruments, per register transition.
const SAMPLED_RANK: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    /// Register dimension.
    pub d: usize,
    /// Alternating steps per pipeline.
    pub steps: usize,
    /// Angular resolution of the grid family.
    pub grid: usize,
    /// Number of random pipelines.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { d: 2, steps: 2, grid: 4, samples: 10_000, seed: 0 }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), WitnessError> {
        let bad = |m: String| Err(WitnessError::InvalidBudget(m));
        if !(2..=4).contains(&self.d) {
            return bad(format!("mediator dimension {} not in 2..=4", self.d));
        }
        if !(1..=MAX_STEPS).contains(&self.steps) {
            return bad(format!("steps {} not in 1..={MAX_STEPS}", self.steps));
        }
        if self.grid == 0 {
            return bad("grid resolution must be positive".into());
        }
        if self.samples == 0 {
            return bad("sample count must be positive".into());
        }
        Ok(())
    }

    /// Resolution actually used: deeper pipelines use a coarser grid so the
    /// product space stays small.
    pub fn effective_grid(&self) -> usize {
        if self.steps <= 2 {
            self.grid
        } else {
            (self.grid / 2).max(2)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSummary {
    pub config: SearchConfig,
    pub effective_grid: usize,
    pub grid_pipelines: u64,
    pub sampled_pipelines: u64,
    pub max_negativity: f64,
    pub max_chsh: f64,
    /// Pipeline attaining `max_negativity`.
    pub argmax_negativity: String,
    /// Pipeline attaining `max_chsh`.
    pub argmax_chsh: String,
    /// Hand-written reference pipelines, included in the maxima.
    pub named: Vec<(String, EntanglementReport)>,
}

#[derive(Debug, Clone, Copy)]
enum Update {
    Keep,
    Overwrite,
    Add,
}

#[derive(Debug, Clone, Copy)]
enum GridStep {
    /// Projective measurement along `(θ, φ) = (kπ/r, 2πj/r)`.
    Measure { k: usize, j: usize, update: Update },
    /// Rotation by `m·kπ/r` about an axis when the register reads `m`.
    Rotate { axis: Letter, k: usize },
}

impl GridStep {
    fn family(r: usize) -> Vec<GridStep> {
        let mut out = Vec::new();
        for k in 0..=r {
            // The poles need only one azimuth.
            let azimuths = if k == 0 || k == r { 1 } else { r };
            for j in 0..azimuths {
                for update in [Update::Keep, Update::Overwrite, Update::Add] {
                    out.push(GridStep::Measure { k, j, update });
                }
            }
        }
        for axis in [Letter::X, Letter::Y, Letter::Z] {
            for k in 1..=r {
                out.push(GridStep::Rotate { axis, k });
            }
        }
        out
    }

    fn instrument(self, d: usize, r: usize) -> Instrument {
        let mut kraus = vec![vec![Vec::new(); d]; d];
        match self {
            GridStep::Measure { k, j, update } => {
                let (theta, phi) = (k as f64 * PI / r as f64, 2.0 * PI * j as f64 / r as f64);
                let up =
                    Vector2::new(Complex::from((theta / 2.0).cos()), Complex::from_polar((theta / 2.0).sin(), phi));
                let down = Vector2::new(-up[1].conj(), up[0].conj());
                for (m, row) in kraus.iter_mut().enumerate() {
                    for (o, v) in [up, down].iter().enumerate() {
                        let to = match update {
                            Update::Keep => m,
                            Update::Overwrite => o,
                            Update::Add => (m + o) % d,
                        };
                        row[to].push(pure_qubit(v));
                    }
                }
            }
            GridStep::Rotate { axis, k } => {
                for (m, row) in kraus.iter_mut().enumerate() {
                    let angle = m as f64 * k as f64 * PI / r as f64;
                    let u = Qubit::identity() * Complex::from((angle / 2.0).cos())
                        - pauli_c64(axis) * Complex::new(0.0, (angle / 2.0).sin());
                    row[m].push(u);
                }
            }
        }
        Instrument::new(d, kraus).expect("grid instruments are trace preserving")
    }

    fn describe(self) -> String {
        match self {
            GridStep::Measure { k, j, update } => format!("measure(k={k},j={j},{update:?})"),
            GridStep::Rotate { axis, k } => format!("rotate({}, k={k})", axis.as_char()),
        }
    }
}

const GRID_INITIAL: [(&str, &str); 4] = [("0", "0"), ("+", "0"), ("+", "+"), ("+i", "+")];

fn run_pipeline(mut s: HybridState, steps: &[Instrument]) -> Result<HybridState, WitnessError> {
    for (i, inst) in steps.iter().enumerate() {
        s = if i % 2 == 0 {
            apply_step_a(&s, &LocalStepA { instrument: inst.clone() })?
        } else {
            apply_step_b(&s, &LocalStepB::instrument(inst.clone()))?
        };
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy)]
struct Best {
    negativity: (f64, u64),
    chsh: (f64, u64),
}

impl Best {
    fn of(report: &EntanglementReport, id: u64) -> Self {
        Self { negativity: (report.negativity, id), chsh: (report.chsh, id) }
    }

    fn identity() -> Self {
        Self { negativity: (f64::NEG_INFINITY, u64::MAX), chsh: (f64::NEG_INFINITY, u64::MAX) }
    }

    /// Larger value wins, then smaller id, so the result does not depend on
    /// how the work was split.
    fn merge(self, other: Self) -> Self {
        let pick = |a: (f64, u64), b: (f64, u64)| {
            if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                a
            } else {
                b
            }
        };
        Self { negativity: pick(self.negativity, other.negativity), chsh: pick(self.chsh, other.chsh) }
    }
}

fn report(s: &HybridState) -> Result<EntanglementReport, WitnessError> {
    EntanglementReport::of(&final_ab_state(s))
}

fn random_unit(rng: &mut ChaCha8Rng) -> C64 {
    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// An isometry `C² → C^{d} ⊗ C^{rank} ⊗ C²` from the QR factor of a random
/// matrix, cut into Kraus operators per outgoing label.
fn random_instrument(d: usize, rng: &mut ChaCha8Rng) -> Instrument {
    let rows = d * SAMPLED_RANK * 2;
    let kraus = (0..d)
        .map(|_| {
            let g = DMatrix::from_fn(rows, 2, |_, _| random_unit(rng));
            let v = g.qr().q();
            (0..d)
                .map(|to| {
                    (0..SAMPLED_RANK)
                        .map(|j| {
                            let base = (to * SAMPLED_RANK + j) * 2;
                            Qubit::from_fn(|r, c| v[(base + r, c)])
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Instrument::new(d, kraus).expect("isometries give trace-preserving instruments")
}

fn random_ket(rng: &mut ChaCha8Rng) -> Vector2<C64> {
    Vector2::new(random_unit(rng), random_unit(rng)).normalize()
}

/// Random register distribution, with an independent product state per
/// label.
fn random_initial(d: usize, rng: &mut ChaCha8Rng) -> Result<HybridState, WitnessError> {
    let weights: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0) + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let branches = weights
        .iter()
        .enumerate()
        .map(|(label, w)| Branch {
            probability: w / total,
            label,
            rho: kron(&pure_qubit(&random_ket(rng)), &pure_qubit(&random_ket(rng))),
        })
        .collect();
    HybridState::new(d, branches)
}

fn sampled_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn sampled_pipeline(config: &SearchConfig, index: u64) -> Result<(HybridState, Vec<Instrument>), WitnessError> {
    let mut rng = sampled_rng(config.seed, index);
    let initial = random_initial(config.d, &mut rng)?;
    let steps = (0..config.steps).map(|_| random_instrument(config.d, &mut rng)).collect();
    Ok((initial, steps))
}

/// Register-mediated protocols from the argument for classical mediators.
pub fn named_pipelines(d: usize) -> Result<Vec<(String, HybridState)>, WitnessError> {
    let k = |n: &str| named_ket(n).expect("known ket");
    let mut out = Vec::new();

    let s = HybridState::product(d, 0, &k("+"), &k("0"))?;
    let s = apply_step_a(&s, &measure_z_and_record(d))?;
    out.push(("z_copy_conditional_flip".into(), apply_step_b(&s, &flip_b_if_one(d))?));

    // Register in an even mixture of t₀ and t₁; each qubit flipped iff t₁.
    let zero = kron(&pure_qubit(&k("0")), &pure_qubit(&k("0")));
    let s = HybridState::new(
        d,
        vec![Branch { probability: 0.5, label: 0, rho: zero }, Branch { probability: 0.5, label: 1, rho: zero }],
    )?;
    let flip_a = LocalStepA {
        instrument: Instrument::new(
            d,
            (0..d)
                .map(|m| {
                    (0..d)
                        .map(|to| match (to == m, m == 1) {
                            (true, true) => vec![pauli_c64(Letter::X)],
                            (true, false) => vec![Qubit::identity()],
                            _ => vec![],
                        })
                        .collect()
                })
                .collect(),
        )?,
    };
    let s = apply_step_a(&s, &flip_a)?;
    out.push(("mixture_t0_t1".into(), apply_step_b(&s, &flip_b_if_one(d))?));

    let s = HybridState::product(d, 0, &k("+"), &k("+"))?;
    let s = apply_step_a(&s, &LocalStepA::identity(d))?;
    out.push(("identity".into(), apply_step_b(&s, &LocalStepB::identity(d))?));
    Ok(out)
}

/// Searches classical-mediator pipelines for entanglement or Bell
/// violation. Deterministic for a given configuration, whatever the number
/// of worker threads.
pub fn search_classical_protocols(config: SearchConfig) -> Result<SearchSummary, WitnessError> {
    config.validate()?;
    let d = config.d;
    let r = config.effective_grid();
    let family = GridStep::family(r);
    let instruments: Vec<Instrument> = family.iter().map(|g| g.instrument(d, r)).collect();
    let per_initial = (family.len() as u64).pow(config.steps as u32);
    let grid_pipelines = per_initial * GRID_INITIAL.len() as u64;

    let decode = |id: u64| {
        let mut rest = id % per_initial;
        let steps: Vec<usize> = (0..config.steps)
            .map(|_| {
                let s = (rest % family.len() as u64) as usize;
                rest /= family.len() as u64;
                s
            })
            .collect();
        ((id / per_initial) as usize, steps)
    };

    let grid_best = (0..grid_pipelines)
        .into_par_iter()
        .map(|id| {
            let (init, steps) = decode(id);
            let (a, b) = GRID_INITIAL[init];
            let s = HybridState::product(d, 0, &named_ket(a).unwrap(), &named_ket(b).unwrap())?;
            let chosen: Vec<Instrument> = steps.iter().map(|&i| instruments[i].clone()).collect();
            Ok::<_, WitnessError>(Best::of(&report(&run_pipeline(s, &chosen)?)?, id))
        })
        .try_reduce(Best::identity, |a, b| Ok(a.merge(b)))?;

    let sampled_best = (0..config.samples as u64)
        .into_par_iter()
        .map(|i| {
            let (s, steps) = sampled_pipeline(&config, i)?;
            Ok::<_, WitnessError>(Best::of(&report(&run_pipeline(s, &steps)?)?, grid_pipelines + i))
        })
        .try_reduce(Best::identity, |a, b| Ok(a.merge(b)))?;

    let named_base = grid_pipelines + config.samples as u64;
    let mut best = grid_best.merge(sampled_best);
    let mut named = Vec::new();
    for (i, (name, s)) in named_pipelines(d)?.into_iter().enumerate() {
        let rep = report(&s)?;
        best = best.merge(Best::of(&rep, named_base + i as u64));
        named.push((name, rep));
    }

    let describe = |id: u64| -> String {
        if id < grid_pipelines {
            let (init, steps) = decode(id);
            let (a, b) = GRID_INITIAL[init];
            let parts: Vec<String> = steps.iter().map(|&i| family[i].describe()).collect();
            format!("grid |{a}⟩|{b}⟩ {}", parts.join(" ; "))
        } else if id < named_base {
            format!("sample {}", id - grid_pipelines)
        } else {
            format!("named {}", named[(id - named_base) as usize].0)
        }
    };

    Ok(SearchSummary {
        config,
        effective_grid: r,
        grid_pipelines,
        sampled_pipelines: config.samples as u64,
        max_negativity: best.negativity.0,
        max_chsh: best.chsh.0,
        argmax_negativity: describe(best.negativity.1),
        argmax_chsh: describe(best.chsh.1),
        named,
    })
}

/// Final states of a few sampled pipelines, for property tests.
pub fn sample_final_states(config: &SearchConfig, count: u64) -> Result<Vec<super::TwoQubit>, WitnessError> {
    (0..count)
        .map(|i| {
            let (s, steps) = sampled_pipeline(config, i)?;
            Ok(final_ab_state(&run_pipeline(s, &steps)?))
        })
        .collect()
}

#[cfg(test)]
pub(super) fn sampled_steps_for_tests(config: &SearchConfig, index: u64) -> (HybridState, Vec<Instrument>) {
    sampled_pipeline(config, index).expect("valid config")
}
