//! Monomials in excitation-mode ladder operators: application to vectors on
//! a truncated excitation basis, Bogoliubov-frame substitution, realization
//! as sparse matrices, and exact sector-diagonal decorations (the √(N-𝒩)
//! factors of the conjugated Hamiltonian).
//!
//! Mode labels index the *nonzero* modes (positions in
//! `ExcitationBasis::mode_ids`), not the full mode set.

use crate::fock::ExcitationBasis;
use crate::sparse::SparseOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderOp {
    pub mode: u16,
    pub dag: bool,
}

pub fn create(mode: usize) -> LadderOp {
    LadderOp {
        mode: mode as u16,
        dag: true,
    }
}

pub fn annihilate(mode: usize) -> LadderOp {
    LadderOp {
        mode: mode as u16,
        dag: false,
    }
}

/// coeff · op[0] · op[1] · … · op[last], applied left to right to bras,
/// right to left to kets.
#[derive(Debug, Clone)]
pub struct Monomial {
    pub coeff: f64,
    pub ops: Vec<LadderOp>,
}

impl Monomial {
    pub fn new(coeff: f64, ops: Vec<LadderOp>) -> Self {
        Monomial { coeff, ops }
    }

    /// Hermitian conjugate: reverse order, flip daggers.
    pub fn dagger(&self) -> Monomial {
        Monomial {
            coeff: self.coeff,
            ops: self
                .ops
                .iter()
                .rev()
                .map(|o| LadderOp {
                    mode: o.mode,
                    dag: !o.dag,
                })
                .collect(),
        }
    }

    /// +1 if the monomial preserves sector parity (even # of operators).
    pub fn parity(&self) -> i8 {
        if self.ops.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Net sector change (creations − annihilations).
    pub fn sector_shift(&self) -> i64 {
        self.ops
            .iter()
            .map(|o| if o.dag { 1i64 } else { -1 })
            .sum()
    }

    /// Net momentum transfer in units of the mode labels' momenta.
    pub fn momentum_transfer(&self, basis: &ExcitationBasis, modes: &crate::model::ModeSet) -> [i32; 3] {
        let mut t = [0i32; 3];
        for o in &self.ops {
            let id = basis.mode_ids[o.mode as usize];
            let n = modes.mode(id);
            let s = if o.dag { 1 } else { -1 };
            for j in 0..3 {
                t[j] += s * n[j];
            }
        }
        t
    }
}

/// Exact diagonal decorations f(k; N) evaluated on the *input* sector k.
/// Square roots clamp at zero, matching the exact conjugated operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorFactor {
    One,
    /// √(N-k), k the input sector
    SqrtCondensate,
    /// √(N-k) evaluated on the output sector (input − 1)
    SqrtCondensateOut,
    /// √((N-k)(N-k-1)), k the input sector
    SqrtCondensatePair,
    /// √((N-k)(N-k-1)) on the output sector (input − 2)
    SqrtCondensatePairOut,
    /// k(k-1)
    ExcitedPair,
    /// N-k
    Condensate,
}

impl SectorFactor {
    pub fn eval(&self, sector: usize, n: usize) -> f64 {
        let k = sector as f64;
        let nn = n as f64;
        let pair = |k: f64| ((nn - k).max(0.0) * (nn - k - 1.0).max(0.0)).sqrt();
        match self {
            SectorFactor::One => 1.0,
            SectorFactor::SqrtCondensate => (nn - k).max(0.0).sqrt(),
            SectorFactor::SqrtCondensateOut => (nn - (k - 1.0)).max(0.0).sqrt(),
            SectorFactor::SqrtCondensatePair => pair(k),
            SectorFactor::SqrtCondensatePairOut => pair(k - 2.0),
            SectorFactor::ExcitedPair => k * (k - 1.0),
            SectorFactor::Condensate => nn - k,
        }
    }
}

/// A monomial with an exact sector-diagonal factor on its right.
#[derive(Debug, Clone)]
pub struct DecoratedMonomial {
    pub mono: Monomial,
    pub factor: SectorFactor,
}

/// Apply Σ monomials to `x` on the truncated basis; amplitudes pushed past
/// the sector cutoff are dropped (the caller chooses k_max large enough
/// that this is exact for its use).
pub fn apply_monomials(monos: &[Monomial], basis: &ExcitationBasis, x: &[f64]) -> Vec<f64> {
    let decorated: Vec<DecoratedMonomial> = monos
        .iter()
        .map(|m| DecoratedMonomial {
            mono: m.clone(),
            factor: SectorFactor::One,
        })
        .collect();
    apply_decorated(&decorated, basis, x, 0)
}

/// Apply decorated monomials; `n` feeds the sector factors.
pub fn apply_decorated(
    monos: &[DecoratedMonomial],
    basis: &ExcitationBasis,
    x: &[f64],
    n: usize,
) -> Vec<f64> {
    let mut y = vec![0.0; basis.len()];
    let m_modes = basis.n_modes();
    let mut work = vec![0u8; m_modes];
    for (i, &amp0) in x.iter().enumerate() {
        if amp0 == 0.0 {
            continue;
        }
        let sector = basis.sector_of(i);
        let src = basis.state(i);
        'mono: for dm in monos {
            let f = dm.factor.eval(sector, n);
            if f == 0.0 || dm.mono.coeff == 0.0 {
                continue;
            }
            work.copy_from_slice(src);
            let mut amp = amp0 * dm.mono.coeff * f;
            for op in dm.mono.ops.iter().rev() {
                let m = op.mode as usize;
                if op.dag {
                    amp *= (work[m] as f64 + 1.0).sqrt();
                    work[m] += 1;
                } else {
                    if work[m] == 0 {
                        continue 'mono;
                    }
                    amp *= work[m] as f64;
                    amp = amp / (work[m] as f64).sqrt();
                    work[m] -= 1;
                }
            }
            match basis.index_of(&work) {
                Some(j) => y[j] += amp,
                None => continue, // beyond k_max: truncated
            }
        }
    }
    y
}

/// Realize Σ monomials as a sparse matrix on the truncated basis.
pub fn realize(monos: &[Monomial], basis: &ExcitationBasis) -> SparseOperator {
    let decorated: Vec<DecoratedMonomial> = monos
        .iter()
        .map(|m| DecoratedMonomial {
            mono: m.clone(),
            factor: SectorFactor::One,
        })
        .collect();
    realize_decorated(&decorated, basis, 0)
}

pub fn realize_decorated(
    monos: &[DecoratedMonomial],
    basis: &ExcitationBasis,
    n: usize,
) -> SparseOperator {
    let mut trip: Vec<(u32, u32, f64)> = Vec::new();
    let mut x = vec![0.0; basis.len()];
    for col in 0..basis.len() {
        x[col] = 1.0;
        let y = apply_decorated(monos, basis, &x, n);
        x[col] = 0.0;
        for (row, &v) in y.iter().enumerate() {
            if v != 0.0 {
                trip.push((row as u32, col as u32, v));
            }
        }
    }
    SparseOperator::from_triplets(basis.len(), trip)
}

/// Substitute the Bogoliubov frame: a_p = u_p b_p − v_p b_{-p}†,
/// a_p† = u_p b_p† − v_p b_{-p}; u, v indexed by nonzero-mode position,
/// `negation` maps a position to the position of its negated momentum.
pub fn rotate_to_quasiparticle(
    monos: &[Monomial],
    u: &[f64],
    v: &[f64],
    negation: &[usize],
) -> Vec<Monomial> {
    let mut out = Vec::new();
    for m in monos {
        let mut partial: Vec<(f64, Vec<LadderOp>)> = vec![(m.coeff, Vec::new())];
        for op in &m.ops {
            let p = op.mode as usize;
            let np = negation[p] as u16;
            let mut next = Vec::with_capacity(partial.len() * 2);
            for (c, ops) in &partial {
                // u-branch keeps the operator, v-branch flips mode and dagger
                let mut o1 = ops.clone();
                o1.push(LadderOp {
                    mode: op.mode,
                    dag: op.dag,
                });
                next.push((c * u[p], o1));
                let mut o2 = ops.clone();
                o2.push(LadderOp {
                    mode: np,
                    dag: !op.dag,
                });
                next.push((-c * v[p], o2));
            }
            partial = next;
        }
        for (c, ops) in partial {
            if c != 0.0 {
                out.push(Monomial::new(c, ops));
            }
        }
    }
    out
}
