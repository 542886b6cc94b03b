//! Ground-truth cutoff model: momentum modes on the unit torus, the pair
//! potential in Fourier space, the trap grid, and the particle number.
//!
//! Momenta are stored as integer vectors n with physical value p = 2πn, so
//! momentum bookkeeping is exact; the kinetic energy of mode n is 4π²|n|².
//! Interaction terms that would scatter outside the mode set are dropped,
//! and the *same* truncated Hamiltonian feeds the expansion pipeline and
//! the exact-diagonalization oracle.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Integer momentum label; unused trailing components are zero.
pub type ModeVec = [i32; 3];

/// Default cap on (2K+1)^d.
pub const DEFAULT_MODE_BUDGET: u128 = 100_000;

/// The set {p = 2πn : |n|_∞ ≤ K} ⊂ (2πZ)^d, in lexicographic n-order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub dim: usize,
    pub cutoff: i32,
    modes: Vec<ModeVec>,
    zero_index: usize,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    pub fn mode(&self, i: usize) -> ModeVec {
        self.modes[i]
    }

    pub fn modes(&self) -> &[ModeVec] {
        &self.modes
    }

    /// Index of n in the set, if |n|_∞ ≤ K.
    pub fn index_of(&self, n: &ModeVec) -> Option<usize> {
        let k = self.cutoff;
        let w = (2 * k + 1) as usize;
        let mut idx = 0usize;
        for j in 0..self.dim {
            if n[j].abs() > k {
                return None;
            }
            idx = idx * w + (n[j] + k) as usize;
        }
        for j in self.dim..3 {
            if n[j] != 0 {
                return None;
            }
        }
        Some(idx)
    }

    pub fn negate_index(&self, i: usize) -> usize {
        let n = self.modes[i];
        self.index_of(&[-n[0], -n[1], -n[2]])
            .expect("mode set closed under negation")
    }

    /// Kinetic energy 4π²|n|² of mode i.
    pub fn kinetic(&self, i: usize) -> f64 {
        let n = self.modes[i];
        let n2 = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64;
        TWO_PI * TWO_PI * n2
    }

    /// Indices of the nonzero modes, in set order.
    pub fn nonzero_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| i != self.zero_index).collect()
    }
}

/// `build_mode_set`: full cube of integer momenta, deterministic
/// lexicographic ordering, budget-checked.
pub fn build_mode_set(dim: usize, cutoff: i32) -> Result<ModeSet> {
    build_mode_set_with_budget(dim, cutoff, DEFAULT_MODE_BUDGET)
}

pub fn build_mode_set_with_budget(dim: usize, cutoff: i32, budget: u128) -> Result<ModeSet> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidModel(format!("dimension {dim} not in 1..=3")));
    }
    if cutoff < 1 {
        return Err(Error::InvalidModel(format!("cutoff {cutoff} < 1")));
    }
    let w = (2 * cutoff + 1) as u128;
    let count = w.pow(dim as u32);
    if count > budget {
        return Err(Error::ModeBudget {
            modes: count,
            budget,
        });
    }
    let mut modes = Vec::with_capacity(count as usize);
    let mut n = [-cutoff; 3];
    for j in dim..3 {
        n[j] = 0;
    }
    loop {
        modes.push(n);
        // lexicographic odometer over the first `dim` components
        let mut j = dim;
        loop {
            if j == 0 {
                let zero_index = modes
                    .iter()
                    .position(|m| *m == [0, 0, 0])
                    .expect("zero mode present");
                return Ok(ModeSet {
                    dim,
                    cutoff,
                    modes,
                    zero_index,
                });
            }
            j -= 1;
            if n[j] < cutoff {
                n[j] += 1;
                for l in j + 1..dim {
                    n[l] = -cutoff;
                }
                break;
            }
        }
    }
}

/// v̂ on the closure of mode differences, |n|_∞ ≤ 2K. Units of energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPotential {
    pub dim: usize,
    /// Half-width of the difference lattice (2K for a cutoff-K mode set).
    pub range: i32,
    values: Vec<f64>,
}

impl PairPotential {
    pub fn from_fn(dim: usize, range: i32, f: impl Fn(&ModeVec) -> f64) -> Self {
        let w = (2 * range + 1) as usize;
        let count = w.pow(dim as u32);
        let mut values = vec![0.0; count];
        let mut p = PairPotential {
            dim,
            range,
            values: Vec::new(),
        };
        for (idx, v) in values.iter_mut().enumerate() {
            let n = p.unflatten(idx);
            *v = f(&n);
        }
        p.values = values;
        p
    }

    pub fn constant(dim: usize, range: i32, value: f64) -> Self {
        Self::from_fn(dim, range, |_| value)
    }

    pub fn zero(dim: usize, range: i32) -> Self {
        Self::constant(dim, range, 0.0)
    }

    fn flatten(&self, n: &ModeVec) -> Option<usize> {
        let r = self.range;
        let w = (2 * r + 1) as usize;
        let mut idx = 0usize;
        for j in 0..self.dim {
            if n[j].abs() > r {
                return None;
            }
            idx = idx * w + (n[j] + r) as usize;
        }
        Some(idx)
    }

    fn unflatten(&self, mut idx: usize) -> ModeVec {
        let r = self.range;
        let w = (2 * r + 1) as usize;
        let mut n = [0i32; 3];
        for j in (0..self.dim).rev() {
            n[j] = (idx % w) as i32 - r;
            idx /= w;
        }
        n
    }

    /// v̂ at difference momentum 2πn. Zero outside the stored lattice.
    pub fn vhat(&self, n: &ModeVec) -> f64 {
        self.flatten(n).map(|i| self.values[i]).unwrap_or(0.0)
    }

    pub fn vhat_zero(&self) -> f64 {
        self.vhat(&[0, 0, 0])
    }

    pub fn set(&mut self, n: &ModeVec, value: f64) {
        let i = self.flatten(n).expect("difference momentum in range");
        self.values[i] = value;
    }

    /// Scale all coefficients by λ (used by the binding-energy re-expansion).
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut p = self.clone();
        for v in &mut p.values {
            *v *= lambda;
        }
        p
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn entries(&self) -> impl Iterator<Item = (ModeVec, f64)> + '_ {
        (0..self.values.len()).map(|i| (self.unflatten(i), self.values[i]))
    }
}

/// `validate_potential`: nonnegativity and evenness at every representable
/// difference momentum; errors name the offending k.
pub fn validate_potential(pot: PairPotential, modes: &ModeSet) -> Result<PairPotential> {
    if pot.dim != modes.dim {
        return Err(Error::InvalidModel(format!(
            "potential dimension {} ≠ mode dimension {}",
            pot.dim, modes.dim
        )));
    }
    if pot.range < 2 * modes.cutoff {
        return Err(Error::InvalidModel(format!(
            "potential range {} does not cover mode differences up to {}",
            pot.range,
            2 * modes.cutoff
        )));
    }
    for (n, v) in pot.entries() {
        if v < 0.0 {
            return Err(Error::PotentialPositivity {
                k: n[..pot.dim].to_vec(),
                value: v,
            });
        }
    }
    for (n, v) in pot.entries() {
        let m = [-n[0], -n[1], -n[2]];
        let mv = pot.vhat(&m);
        if (mv - v).abs() > 1e-12 * (1.0 + v.abs()) {
            return Err(Error::PotentialEvenness {
                k: n[..pot.dim].to_vec(),
                value: v,
                mirror: mv,
            });
        }
    }
    Ok(pot)
}

/// Trap grid: uniform 1-d grid on [-L, L] with sampled confining potential.
#[derive(Debug, Clone)]
pub struct TrapGrid {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
    pub spacing: f64,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

/// Confinement threshold the boundary samples must exceed.
pub const DEFAULT_CONFINEMENT: f64 = 1.0;

impl TrapGrid {
    pub fn new_1d(half_width: f64, points: usize, trap: impl Fn(f64) -> f64) -> Result<Self> {
        if points < 8 || half_width <= 0.0 {
            return Err(Error::InvalidModel(
                "trap grid needs L > 0 and at least 8 points".into(),
            ));
        }
        let h = 2.0 * half_width / (points - 1) as f64;
        let xs: Vec<f64> = (0..points).map(|i| -half_width + h * i as f64).collect();
        let values: Vec<f64> = xs.iter().map(|&x| trap(x)).collect();
        let grid = TrapGrid {
            dim: 1,
            half_width,
            points,
            spacing: h,
            xs,
            values,
        };
        grid.check(DEFAULT_CONFINEMENT)?;
        Ok(grid)
    }

    pub fn harmonic_1d(half_width: f64, points: usize) -> Result<Self> {
        Self::new_1d(half_width, points, |x| x * x)
    }

    pub fn from_values_1d(half_width: f64, values: Vec<f64>) -> Result<Self> {
        let points = values.len();
        if points < 8 || half_width <= 0.0 {
            return Err(Error::InvalidModel(
                "trap grid needs L > 0 and at least 8 points".into(),
            ));
        }
        let h = 2.0 * half_width / (points - 1) as f64;
        let xs: Vec<f64> = (0..points).map(|i| -half_width + h * i as f64).collect();
        let grid = TrapGrid {
            dim: 1,
            half_width,
            points,
            spacing: h,
            xs,
            values,
        };
        grid.check(DEFAULT_CONFINEMENT)?;
        Ok(grid)
    }

    fn check(&self, confinement: f64) -> Result<()> {
        if self.values.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidModel("trap values must be ≥ 0".into()));
        }
        let first = *self.values.first().unwrap();
        let last = *self.values.last().unwrap();
        if first < confinement || last < confinement {
            return Err(Error::InvalidModel(format!(
                "trap too shallow at box boundary: V(±L) = ({first}, {last}) < {confinement}"
            )));
        }
        Ok(())
    }
}

/// The single ground-truth Hamiltonian: mode set, pair potential, particle
/// number, coupling λ_N = 1/(N-1).
#[derive(Debug, Clone)]
pub struct CutoffModel {
    pub modes: ModeSet,
    pub potential: PairPotential,
    pub n_particles: usize,
}

impl CutoffModel {
    pub fn new(modes: ModeSet, potential: PairPotential, n_particles: usize) -> Result<Self> {
        if n_particles < 2 {
            return Err(Error::InvalidModel(format!(
                "particle number {n_particles} < 2"
            )));
        }
        let potential = validate_potential(potential, &modes)?;
        Ok(CutoffModel {
            modes,
            potential,
            n_particles,
        })
    }

    pub fn coupling(&self) -> f64 {
        1.0 / (self.n_particles as f64 - 1.0)
    }

    /// Same modes and potential, different particle number.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.modes.clone(), self.potential.clone(), n)
    }

    /// Same modes and particle number, coupling-scaled potential.
    pub fn with_scaled_potential(&self, lambda: f64) -> Result<Self> {
        Self::new(
            self.modes.clone(),
            self.potential.scaled(lambda),
            self.n_particles,
        )
    }

    /// The d=1 benchmark: modes {0, ±2π, …}, v̂ ≡ vhat, N particles.
    pub fn benchmark(cutoff: i32, vhat: f64, n_particles: usize) -> Result<Self> {
        let modes = build_mode_set(1, cutoff)?;
        let pot = PairPotential::constant(1, 2 * cutoff, vhat);
        Self::new(modes, pot, n_particles)
    }
}

/// JSON model configuration (`"spec": 1`). Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub spec: u32,
    pub dimension: usize,
    pub cutoff: i32,
    pub potential: PotentialConfig,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<TrapConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    /// v̂ ≡ value on every representable difference momentum.
    Constant { value: f64 },
    /// Explicit v̂ table; omitted entries are zero.
    Table { entries: Vec<PotentialEntry> },
    /// v̂(2πn) = amplitude · exp(-(2π|n| width)²/2); on the trap grid this is
    /// the real-space Gaussian v(x) = amplitude · exp(-x²/(2 width²)).
    Gaussian { amplitude: f64, width: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialEntry {
    pub n: Vec<i32>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    #[serde(rename = "L")]
    pub l: f64,
    pub points: usize,
    pub kind: TrapKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapKind {
    Harmonic,
    Table,
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ModelConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.spec != 1 {
            return Err(Error::Config(format!(
                "unsupported schema version {}",
                cfg.spec
            )));
        }
        Ok(cfg)
    }

    pub fn build_potential(&self, range: i32) -> Result<PairPotential> {
        let dim = self.dimension;
        Ok(match &self.potential {
            PotentialConfig::Constant { value } => PairPotential::constant(dim, range, *value),
            PotentialConfig::Table { entries } => {
                let mut p = PairPotential::zero(dim, range);
                for e in entries {
                    if e.n.len() != dim {
                        return Err(Error::Config(format!(
                            "potential entry n = {:?} has wrong dimension",
                            e.n
                        )));
                    }
                    let mut n = [0i32; 3];
                    n[..dim].copy_from_slice(&e.n);
                    p.set(&n, e.value);
                }
                p
            }
            PotentialConfig::Gaussian { amplitude, width } => {
                PairPotential::from_fn(dim, range, |n| {
                    let n2 = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64;
                    let p2 = TWO_PI * TWO_PI * n2;
                    amplitude * (-0.5 * p2 * width * width).exp()
                })
            }
        })
    }

    /// Build the torus cutoff model (trap section ignored here).
    pub fn build_model(&self) -> Result<CutoffModel> {
        let modes = build_mode_set(self.dimension, self.cutoff)?;
        let pot = self.build_potential(2 * self.cutoff)?;
        CutoffModel::new(modes, pot, self.n)
    }

    pub fn build_trap(&self) -> Result<Option<TrapGrid>> {
        match &self.trap {
            None => Ok(None),
            Some(t) => {
                if self.dimension != 1 {
                    return Err(Error::Unsupported(
                        "trap grids are implemented in d = 1".into(),
                    ));
                }
                let grid = match t.kind {
                    TrapKind::Harmonic => TrapGrid::harmonic_1d(t.l, t.points)?,
                    TrapKind::Table => {
                        let vals = t.values.clone().ok_or_else(|| {
                            Error::Config("trap kind \"table\" needs \"values\"".into())
                        })?;
                        if vals.len() != t.points {
                            return Err(Error::Config(format!(
                                "trap table has {} values for {} points",
                                vals.len(),
                                t.points
                            )));
                        }
                        TrapGrid::from_values_1d(t.l, vals)?
                    }
                };
                Ok(Some(grid))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_set_d1_k1() {
        let m = build_mode_set(1, 1).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.modes(), &[[-1, 0, 0], [0, 0, 0], [1, 0, 0]]);
        assert_eq!(m.zero_index(), 1);
        assert!((m.kinetic(2) - TWO_PI * TWO_PI).abs() < 1e-12);
    }

    #[test]
    fn mode_set_counts() {
        assert_eq!(build_mode_set(1, 2).unwrap().len(), 5);
        assert_eq!(build_mode_set(2, 1).unwrap().len(), 9);
        assert_eq!(build_mode_set(3, 1).unwrap().len(), 27);
    }

    #[test]
    fn negation_is_a_bijection() {
        for (d, k) in [(1, 3), (2, 2), (3, 1)] {
            let m = build_mode_set(d, k).unwrap();
            let mut seen = vec![false; m.len()];
            for i in 0..m.len() {
                let j = m.negate_index(i);
                assert_eq!(m.negate_index(j), i);
                seen[j] = true;
            }
            assert!(seen.iter().all(|&s| s));
            assert_eq!(m.negate_index(m.zero_index()), m.zero_index());
        }
    }

    #[test]
    fn budget_error() {
        let err = build_mode_set_with_budget(3, 10, 1000).unwrap_err();
        assert!(matches!(err, Error::ModeBudget { .. }));
    }

    #[test]
    fn deterministic_rebuild() {
        let a = build_mode_set(2, 2).unwrap();
        let b = build_mode_set(2, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn potential_validation() {
        let m = build_mode_set(1, 1).unwrap();
        let ok = PairPotential::constant(1, 2, 1.0);
        assert!(validate_potential(ok, &m).is_ok());

        let mut bad = PairPotential::constant(1, 2, 1.0);
        bad.set(&[1, 0, 0], -0.1);
        match validate_potential(bad, &m).unwrap_err() {
            Error::PotentialPositivity { k, .. } => assert_eq!(k, vec![1]),
            e => panic!("wrong error {e}"),
        }

        let mut odd = PairPotential::constant(1, 2, 1.0);
        odd.set(&[1, 0, 0], 1.0);
        odd.set(&[-1, 0, 0], 0.5);
        assert!(matches!(
            validate_potential(odd, &m).unwrap_err(),
            Error::PotentialEvenness { .. }
        ));
    }

    #[test]
    fn config_round_trip() {
        let text = r#"{
            "spec": 1, "dimension": 1, "cutoff": 1,
            "potential": {"kind": "constant", "value": 1.0},
            "N": 10
        }"#;
        let cfg = ModelConfig::parse(text).unwrap();
        let model = cfg.build_model().unwrap();
        assert_eq!(model.modes.len(), 3);
        assert_eq!(model.n_particles, 10);
        assert!((model.potential.vhat_zero() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let text = r#"{"spec": 1, "dimension": 1, "cutoff": 1,
            "potential": {"kind": "constant", "value": 1.0},
            "N": 10, "typo": 3}"#;
        assert!(ModelConfig::parse(text).is_err());
    }

    #[test]
    fn trap_requires_confinement() {
        assert!(TrapGrid::new_1d(8.0, 64, |_| 0.5).is_err());
        assert!(TrapGrid::harmonic_1d(8.0, 64).is_ok());
    }
}
