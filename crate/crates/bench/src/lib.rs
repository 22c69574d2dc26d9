//! Fixtures shared by the benchmarks in `benches/`.

use trapped::catalog::{self, EntryRef};
use trapped::{Embedding, GridSpec, QuadratureRule, VectorField};

/// The trapped Schwarzschild sphere `r = 1`, `M = 1`.
pub fn ef_sphere() -> Embedding {
    let m = catalog::metric(&"schwarzschild_ef:M=1".parse().expect("valid reference")).expect("catalog metric");
    catalog::embedding_in(&"ef_sphere:r=1".parse().expect("valid reference"), m).expect("catalog embedding")
}

pub fn round_sphere() -> Embedding {
    catalog::embedding(&EntryRef::new("round_sphere")).expect("catalog embedding")
}

pub fn polynomial_field(e: &Embedding) -> VectorField {
    catalog::vector_field(&"polynomial:seed=1,degree=2".parse().expect("valid reference"), e.ambient())
        .expect("catalog field")
}

pub fn radial_field(e: &Embedding) -> VectorField {
    catalog::vector_field(&EntryRef::new("radial_unit"), e.ambient()).expect("catalog field")
}

pub fn grid(n: usize, m: usize) -> GridSpec {
    GridSpec::new(vec![n, m], QuadratureRule::GaussLegendre).expect("valid grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let e = ef_sphere();
        assert_eq!(e.dim(), 2);
        let s = round_sphere();
        polynomial_field(&s);
        radial_field(&s);
        assert_eq!(grid(4, 8).total_points(), 32);
    }
}
