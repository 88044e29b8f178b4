use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{Dataset, EdgeSet, SymmetricMatrix};
use crate::synth::Rng;

/// Everything needed to draw one synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub p: usize,
    /// Edges added per new node in the preferential attachment process.
    pub attach: usize,
    pub edge_weight: f64,
    pub diag_pad: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            p: 100,
            attach: 2,
            edge_weight: 0.3,
            diag_pad: 0.2,
            n_samples: 250,
            seed: 0,
        }
    }
}

/// A generated network with its precision matrix and samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub edges: EdgeSet,
    pub precision: SymmetricMatrix,
    pub data: Dataset,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.attach < 1 || self.attach >= self.p {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= attach < p, got {} and {}",
                self.attach, self.p
            )));
        }
        if self.edge_weight == 0.0 || !self.edge_weight.is_finite() {
            return Err(Error::InvalidArgument(
                "edge weight must be finite and nonzero".into(),
            ));
        }
        if !(self.diag_pad > 0.0) {
            return Err(Error::InvalidArgument(
                "diagonal pad must be positive".into(),
            ));
        }
        Ok(())
    }

    /// BA graph, its precision matrix and `n_samples` draws. The graph uses
    /// `seed` and the samples `seed + 1`.
    pub fn generate(&self) -> Result<Instance> {
        self.validate()?;
        let edges = crate::synth::ba_generate(self.p, self.attach, self.seed)?;
        let precision = precision_from_graph(&edges, self.edge_weight, self.diag_pad)?;
        let data = sample_gaussian(&precision, self.n_samples, self.seed.wrapping_add(1))?;
        Ok(Instance {
            edges,
            precision,
            data,
        })
    }
}

/// `edge_weight` on every edge and a constant diagonal `|λ_min(W)| + diag_pad`,
/// where `W` is the off-diagonal part. The smallest eigenvalue is `diag_pad`.
pub fn precision_from_graph(
    edges: &EdgeSet,
    edge_weight: f64,
    diag_pad: f64,
) -> Result<SymmetricMatrix> {
    if !(diag_pad > 0.0) || !edge_weight.is_finite() {
        return Err(Error::InvalidArgument(
            "diagonal pad must be positive".into(),
        ));
    }
    let p = edges.order();
    let mut w = DMatrix::zeros(p, p);
    for &(u, v) in edges.edges() {
        w[(u, v)] = edge_weight;
        w[(v, u)] = edge_weight;
    }
    let lambda_min = SymmetricEigen::new(w.clone()).eigenvalues.min();
    let d = lambda_min.abs() + diag_pad;
    for i in 0..p {
        w[(i, i)] = d;
    }
    SymmetricMatrix::new(w)
}

/// `n` draws from `N(0, Ω⁻¹)`: with `Ω = LLᵀ`, each sample solves `Lᵀx = z`.
pub fn sample_gaussian(omega: &SymmetricMatrix, n: usize, seed: u64) -> Result<Dataset> {
    let p = omega.order();
    let chol = Cholesky::new(omega.as_matrix().clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let mut rng = Rng::new(seed);
    let mut values = DMatrix::zeros(n, p);
    for k in 0..n {
        let z = DVector::from_fn(p, |_, _| rng.normal());
        let x = l
            .tr_solve_lower_triangular(&z)
            .ok_or(Error::NotPositiveDefinite)?;
        values.row_mut(k).copy_from(&x.transpose());
    }
    Dataset::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_gives_padded_identity() {
        let om = precision_from_graph(&EdgeSet::empty(4), 0.3, 0.2).unwrap();
        assert_eq!(om, SymmetricMatrix::from_diagonal(&[0.2; 4]));
    }

    #[test]
    fn single_edge_closed_form() {
        let om = precision_from_graph(&EdgeSet::new(2, [(0, 1)]).unwrap(), 0.3, 0.2).unwrap();
        assert!((om.get(0, 0) - 0.5).abs() < 1e-15);
        let ev = SymmetricEigen::new(om.into_inner()).eigenvalues;
        let (lo, hi) = (ev.min(), ev.max());
        assert!((lo - 0.2).abs() < 1e-12 && (hi - 0.8).abs() < 1e-12);
    }

    #[test]
    fn ba_precision_keeps_pattern_and_pad() {
        let e = crate::synth::ba_generate(80, 2, 1).unwrap();
        let om = precision_from_graph(&e, 0.3, 0.2).unwrap();
        assert_eq!(crate::model::edges_from_matrix(&om, 0.0).unwrap(), e);
        let lo = SymmetricEigen::new(om.into_inner()).eigenvalues.min();
        assert!(lo >= 0.2 - 1e-9);
    }

    #[test]
    fn scalar_variance() {
        let data = sample_gaussian(&SymmetricMatrix::from_diagonal(&[4.0]), 50_000, 5).unwrap();
        let s = data.empirical_covariance();
        assert!((s.get(0, 0) - 0.25).abs() < 0.25 * 0.05);
    }

    #[test]
    fn non_pd_rejected() {
        let om = SymmetricMatrix::from_rows(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            sample_gaussian(&om, 10, 0),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let om = SymmetricMatrix::identity(3);
        assert_eq!(
            sample_gaussian(&om, 5, 8).unwrap(),
            sample_gaussian(&om, 5, 8).unwrap()
        );
    }
}
