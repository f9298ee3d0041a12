//! Operator-level evaluation of the three-step protocol for tiny `n`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_dims, MeasureCollection, Provenance, TestOutcome};
use crate::error::{Error, Result};
use crate::spectrum::SchmidtSpectrum;

/// Largest `(d_A d_B)^n` the dense oracle will build.
pub const DENSE_DIM_LIMIT: usize = 81;

type CMat = DMatrix<Complex64>;

/// Per-sequence weights `m_ω(x)` of every measure (multiplicities expanded),
/// with sequences chosen by backtracking so blocks inside a measure are
/// disjoint and `Σ_ω m_ω(x) <= 1`.
fn materialize(coll: &MeasureCollection) -> Result<Vec<Vec<f64>>> {
    let (d, n) = (coll.d, coll.n);
    let total = d.pow(n as u32);
    let type_of = |x: usize| {
        let mut c = vec![0u32; d];
        let mut y = x;
        for _ in 0..n {
            c[y % d] += 1;
            y /= d;
        }
        c
    };
    let types: Vec<Vec<u32>> = (0..total).map(type_of).collect();
    // (measure slot, type, size, weight)
    let mut jobs = Vec::new();
    let mut slots = 0;
    for m in &coll.measures {
        for _ in 0..m.multiplicity {
            for b in &m.blocks {
                jobs.push((slots, b.type_counts.clone(), b.size as usize, b.weight.to_f64()));
            }
            slots += 1;
        }
    }
    let mut weights = vec![vec![0.0; total]; slots];
    let mut load = vec![0.0; total];

    fn place(
        jobs: &[(usize, Vec<u32>, usize, f64)],
        types: &[Vec<u32>],
        weights: &mut [Vec<f64>],
        load: &mut [f64],
    ) -> bool {
        let Some(((slot, q, size, w), rest)) = jobs.split_first() else {
            return true;
        };
        let cands: Vec<usize> = (0..types.len())
            .filter(|&x| types[x] == *q && weights[*slot][x] == 0.0 && load[x] + w <= 1.0 + 1e-12)
            .collect();
        choose(&cands, 0, *size, *slot, *w, rest, types, weights, load)
    }

    #[allow(clippy::too_many_arguments)]
    fn choose(
        cands: &[usize],
        from: usize,
        left: usize,
        slot: usize,
        w: f64,
        rest: &[(usize, Vec<u32>, usize, f64)],
        types: &[Vec<u32>],
        weights: &mut [Vec<f64>],
        load: &mut [f64],
    ) -> bool {
        if left == 0 {
            return place(rest, types, weights, load);
        }
        for i in from..cands.len() {
            if cands.len() - i < left {
                break;
            }
            let x = cands[i];
            weights[slot][x] = w;
            load[x] += w;
            if choose(cands, i + 1, left - 1, slot, w, rest, types, weights, load) {
                return true;
            }
            weights[slot][x] = 0.0;
            load[x] -= w;
        }
        false
    }

    if !place(&jobs, &types, &mut weights, &mut load) {
        return Err(Error::Infeasible("no sequence assignment realizes the blocks".into()));
    }
    Ok(weights)
}

/// Builds `T = Σ_{ω,j} √M_ω O^{ωj} √M_ω ⊗ N^ω_j` explicitly and returns
/// `α = 1 - ⟨Ψ^n|T|Ψ^n⟩`, `β = Tr T / (d_A d_B)^n`. Also checks that
/// `Σ_ω M_ω` leaves a positive complement.
pub fn dense_oracle_evaluate(spec: &SchmidtSpectrum, coll: &MeasureCollection) -> Result<TestOutcome> {
    check_dims(spec, coll)?;
    coll.coverage()?;
    let n = coll.n as u32;
    let (da, db) = (spec.dim_a(), spec.dim_b());
    let (na, nb) = (da.pow(n), db.pow(n));
    if n > 2 || na * nb > DENSE_DIM_LIMIT {
        return Err(Error::Budget {
            what: "dense oracle dimension",
            needed: format!("{}", na * nb),
            limit: DENSE_DIM_LIMIT.to_string(),
        });
    }
    let d = spec.dim_min();
    let lam = spec.lambdas();
    let seqs = d.pow(n);
    // Schmidt sequence -> local basis index on each side
    let embed = |x: usize, dim: usize| {
        let (mut y, mut idx, mut scale) = (x, 0, 1);
        for _ in 0..n {
            idx += (y % d) * scale;
            y /= d;
            scale *= dim;
        }
        idx
    };
    let lam_seq: Vec<f64> = (0..seqs)
        .map(|x| {
            let mut y = x;
            (0..n).map(|_| {
                let l = lam[y % d];
                y /= d;
                l
            })
            .product()
        })
        .collect();

    let weights = materialize(coll)?;
    let mut sum_m = vec![0.0; seqs];
    let mut t = CMat::zeros(na * nb, na * nb);
    for m in &weights {
        let supp: Vec<usize> = (0..seqs).filter(|&x| m[x] > 0.0).collect();
        let k = supp.len();
        if k == 0 {
            return Err(Error::Infeasible("measure with empty support".into()));
        }
        for &x in &supp {
            sum_m[x] += m[x];
        }
        for j in 0..k {
            let xi: Vec<Complex64> = (0..k)
                .map(|l| Complex64::from_polar(1.0 / (k as f64).sqrt(), 2.0 * std::f64::consts::PI * (j * l) as f64 / k as f64))
                .collect();
            let mut bob = CMat::zeros(nb, nb);
            for (l1, &x1) in supp.iter().enumerate() {
                for (l2, &x2) in supp.iter().enumerate() {
                    bob[(embed(x1, db), embed(x2, db))] = xi[l1] * xi[l2].conj();
                }
            }
            // O projects on diag(√(mλ)) ξ*, then sandwiched by √M
            let mut v = vec![Complex64::new(0.0, 0.0); na];
            for (l, &x) in supp.iter().enumerate() {
                v[embed(x, da)] = (m[x] * lam_seq[x]).sqrt() * xi[l].conj();
            }
            let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            let mut alice = CMat::zeros(na, na);
            for &x1 in &supp {
                for &x2 in &supp {
                    let (a1, a2) = (embed(x1, da), embed(x2, da));
                    alice[(a1, a2)] = m[x1].sqrt() * v[a1] * v[a2].conj() * m[x2].sqrt() / norm2;
                }
            }
            t += alice.kronecker(&bob);
        }
    }
    if sum_m.iter().any(|&s| s > 1.0 + 1e-12) {
        return Err(Error::Infeasible("Σ_ω M_ω exceeds the identity".into()));
    }

    let mut psi = nalgebra::DVector::<Complex64>::zeros(na * nb);
    for x in 0..seqs {
        psi[embed(x, da) * nb + embed(x, db)] = Complex64::new(lam_seq[x].sqrt(), 0.0);
    }
    let accept = (psi.adjoint() * &t * &psi)[(0, 0)].re;
    let beta = t.trace().re / (na * nb) as f64;
    Ok(TestOutcome {
        alpha: (1.0 - accept).clamp(0.0, 1.0),
        beta,
        log_beta: beta.ln(),
        provenance: Provenance::Exact,
    })
}
