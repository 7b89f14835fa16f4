use super::linalg::{DenseMatrix, SparseSym};
use super::{VertexId, WeightedGraph};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Components up to this size use a dense grounded-Laplacian inverse;
/// larger ones fall back to preconditioned conjugate gradient per query.
pub const DENSE_LIMIT: usize = 2000;

enum Solver<T> {
    Trivial,
    Dense(DenseMatrix<T>),
    Iterative(SparseSym<T>),
}

struct Component<T> {
    /// Local index 0 is the grounded vertex.
    solver: Solver<T>,
}

/// Effective resistances between arbitrary vertex pairs of one graph.
///
/// Each connected component is grounded at its smallest vertex; the inverse
/// of the remaining Laplacian block is the pseudoinverse restricted to
/// potential differences, so `R_uv = M_uu + M_vv - 2 M_uv`.
pub struct ResistanceOracle<T: Scalar> {
    comp: Vec<u32>,
    local: Vec<usize>,
    components: Vec<Component<T>>,
}

impl<T: Scalar> ResistanceOracle<T> {
    pub fn new(g: &WeightedGraph<T>) -> Self {
        Self::with_dense_limit(g, DENSE_LIMIT)
    }

    pub fn with_dense_limit(g: &WeightedGraph<T>, dense_limit: usize) -> Self {
        let n = g.n();
        let (count, comp) = g.unweighted().components();
        let mut members: Vec<Vec<VertexId>> = vec![Vec::new(); count];
        let mut local = vec![0usize; n];
        for v in 0..n {
            let c = comp[v] as usize;
            local[v] = members[c].len();
            members[c].push(v as VertexId);
        }
        let components = members
            .iter()
            .map(|verts| {
                let size = verts.len();
                if size <= 1 {
                    return Component { solver: Solver::Trivial };
                }
                let dim = size - 1;
                if size <= dense_limit {
                    let mut lap = DenseMatrix::zeros(dim);
                    for &x in verts {
                        let lx = local[x as usize];
                        for &(y, w) in g.neighbors(x) {
                            let ly = local[y as usize];
                            if lx > 0 {
                                *lap.at_mut(lx - 1, lx - 1) += w;
                                if ly > 0 {
                                    *lap.at_mut(lx - 1, ly - 1) -= w;
                                }
                            }
                        }
                    }
                    let inv = lap.spd_inverse().expect("grounded Laplacian of a connected component is SPD");
                    Component { solver: Solver::Dense(inv) }
                } else {
                    let mut row_start = vec![0usize];
                    let mut cols = Vec::new();
                    let mut vals = Vec::new();
                    for &x in &verts[1..] {
                        let lx = local[x as usize] - 1;
                        let mut entries: Vec<(usize, T)> = vec![(lx, g.weighted_degree(x))];
                        for &(y, w) in g.neighbors(x) {
                            let ly = local[y as usize];
                            if ly > 0 {
                                entries.push((ly - 1, -w));
                            }
                        }
                        entries.sort_by_key(|e| e.0);
                        for (c, v) in entries {
                            cols.push(c);
                            vals.push(v);
                        }
                        row_start.push(cols.len());
                    }
                    Component { solver: Solver::Iterative(SparseSym { dim, row_start, cols, vals }) }
                }
            })
            .collect();
        ResistanceOracle { comp, local, components }
    }

    /// `R_uv`, or infinity when `u` and `v` lie in different components.
    pub fn resistance(&self, u: VertexId, v: VertexId) -> T {
        if u == v {
            return T::zero();
        }
        let (cu, cv) = (self.comp[u as usize], self.comp[v as usize]);
        if cu != cv {
            return T::infinity();
        }
        let (a, b) = (self.local[u as usize], self.local[v as usize]);
        match &self.components[cu as usize].solver {
            Solver::Trivial => T::zero(),
            Solver::Dense(m) => {
                let get = |i: usize, j: usize| if i == 0 || j == 0 { T::zero() } else { m.at(i - 1, j - 1) };
                get(a, a) + get(b, b) - get(a, b) - get(a, b)
            }
            Solver::Iterative(lap) => {
                let mut rhs = vec![T::zero(); lap.dim];
                if a > 0 {
                    rhs[a - 1] = T::one();
                }
                if b > 0 {
                    rhs[b - 1] = -T::one();
                }
                let x = lap.solve_cg(&rhs, T::solver_tolerance(), 20 * lap.dim + 100);
                let xa = if a > 0 { x[a - 1] } else { T::zero() };
                let xb = if b > 0 { x[b - 1] } else { T::zero() };
                xa - xb
            }
        }
    }
}

/// Effective resistance `b_uv^T L^+ b_uv`; infinite across components.
pub fn effective_resistance<T: Scalar>(g: &WeightedGraph<T>, u: VertexId, v: VertexId) -> Result<T> {
    for x in [u, v] {
        if x as usize >= g.n() {
            return Err(Error::VertexOutOfRange { vertex: x as u64, n: g.n() });
        }
    }
    let (_, comp) = g.unweighted().components();
    if comp[u as usize] != comp[v as usize] {
        return Ok(T::infinity());
    }
    let keep: Vec<VertexId> = (0..g.n() as VertexId).filter(|&x| comp[x as usize] == comp[u as usize]).collect();
    Ok(ResistanceOracle::new(&g.induced(&keep)).resistance(u, v))
}

/// `sum_e w_e R_e`, which equals `n - #components`.
pub fn sum_weighted_resistances<T: Scalar>(g: &WeightedGraph<T>) -> T {
    let oracle = ResistanceOracle::new(g);
    g.edges().map(|((u, v), w)| w * oracle.resistance(u, v)).sum()
}

/// `x^T L_g x`.
pub fn laplacian_quadratic_form<T: Scalar>(g: &WeightedGraph<T>, x: &[T]) -> T {
    g.edges()
        .map(|((u, v), w)| {
            let d = x[u as usize] - x[v as usize];
            w * d * d
        })
        .sum()
}
