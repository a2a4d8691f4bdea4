//! One-step maps for the three schemes.

use alloc::vec;
use alloc::vec::Vec;

use super::{Forcing, MassKind, ParabolicProblem, SchemeConfig, SchemeKind};
use crate::correction::modified_stiffness;
use crate::error::{Error, Result};
use crate::fem::{
    assemble_advection, assemble_load, assemble_lumped_mass, assemble_mass, solve_spd_from, CgOptions,
    DiagonalMatrix, DofMap, FieldVector, QuadratureRule, SparseMatrix,
};
use crate::mesh::Point2;

/// Operators of a problem for one scheme and step size.
///
/// All vectors are full (one entry per vertex). A step updates the free
/// entries and overwrites the constrained ones with `g(t_{n+1})`.
pub struct Stepper<'p, 'a> {
    problem: &'p ParabolicProblem<'a>,
    scheme: SchemeConfig,
    dt: f64,
    dofs: DofMap,
    /// `S - C + B`.
    a: SparseMatrix,
    lumped: DiagonalMatrix,
    consistent: Option<SparseMatrix>,
    /// Free block of the mass matrix (consistent explicit stepping).
    mass_ff: Option<SparseMatrix>,
    /// Free block of `M + dt/2 A` (Crank-Nicolson).
    cn_ff: Option<SparseMatrix>,
    /// Load vector of each separable source term.
    loads: Vec<Vec<f64>>,
    /// Constrained values of each separable boundary term.
    boundary_terms: Vec<Vec<f64>>,
    rule: QuadratureRule,
    cg: CgOptions,
}

impl<'p, 'a> Stepper<'p, 'a> {
    pub fn new(problem: &'p ParabolicProblem<'a>, scheme: SchemeConfig, dt: f64) -> Result<Self> {
        scheme.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("step size {dt} must be positive")));
        }
        if scheme.kind == SchemeKind::CrankNicolson && problem.has_advection() {
            return Err(Error::UnsupportedScheme(
                "Crank-Nicolson needs a symmetric operator; advection is only supported by explicit schemes",
            ));
        }
        let mesh = problem.mesh;
        let dofs = DofMap::from_mesh(mesh);
        let mut a = modified_stiffness(mesh, &problem.correction)?;
        if problem.has_advection() {
            a = a.add_scaled(&assemble_advection(mesh, problem.advection)?, 1.0)?;
        }
        let lumped = assemble_lumped_mass(mesh)?;
        let consistent = match scheme.mass {
            MassKind::Consistent => Some(assemble_mass(mesh)?),
            MassKind::Lumped => None,
        };
        let mass_ff = match (&consistent, scheme.kind.is_explicit()) {
            (Some(m), true) => Some(m.submatrix(dofs.free(), dofs.free())),
            _ => None,
        };
        let cn_ff = if scheme.kind == SchemeKind::CrankNicolson {
            let m = match &consistent {
                Some(m) => m.clone(),
                None => lumped.to_sparse(),
            };
            Some(m.add_scaled(&a, 0.5 * dt)?.submatrix(dofs.free(), dofs.free()))
        } else {
            None
        };
        let rule = QuadratureRule::default();
        let loads = match &problem.f {
            Forcing::Separable(terms) => terms
                .iter()
                .map(|term| assemble_load(mesh, &|x: Point2| (term.space)(x), &rule))
                .collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };
        let boundary_terms = match &problem.g {
            Forcing::Separable(terms) => terms
                .iter()
                .map(|term| {
                    dofs.constrained()
                        .iter()
                        .map(|&v| (term.space)(mesh.vertices()[v]))
                        .collect()
                })
                .collect(),
            _ => Vec::new(),
        };
        Ok(Stepper {
            problem,
            scheme,
            dt,
            dofs,
            a,
            lumped,
            consistent,
            mass_ff,
            cn_ff,
            loads,
            boundary_terms,
            rule,
            cg: CgOptions::default().with_tol(1e-12),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn lumped_mass(&self) -> &DiagonalMatrix {
        &self.lumped
    }

    /// `S - C + B` over all vertices.
    pub fn operator(&self) -> &SparseMatrix {
        &self.a
    }

    /// Load vector `(f(t), phi_i)`.
    pub fn load(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.problem.mesh.n_vertices();
        match &self.problem.f {
            Forcing::Zero => Ok(vec![0.0; n]),
            Forcing::Separable(terms) => {
                let mut load = vec![0.0; n];
                for (term, vector) in terms.iter().zip(&self.loads) {
                    let c = (term.time)(t);
                    if c != 0.0 {
                        for (l, v) in load.iter_mut().zip(vector) {
                            *l += c * v;
                        }
                    }
                }
                Ok(load)
            }
            Forcing::General(f) => assemble_load(self.problem.mesh, &|x: Point2| f(t, x), &self.rule),
        }
    }

    /// `g(t)` on the constrained vertices, in [`DofMap::constrained`] order.
    pub fn boundary(&self, t: f64) -> Vec<f64> {
        let constrained = self.dofs.constrained();
        match &self.problem.g {
            Forcing::Zero => vec![0.0; constrained.len()],
            Forcing::Separable(terms) => {
                let mut values = vec![0.0; constrained.len()];
                for (term, vector) in terms.iter().zip(&self.boundary_terms) {
                    let c = (term.time)(t);
                    for (g, v) in values.iter_mut().zip(vector) {
                        *g += c * v;
                    }
                }
                values
            }
            Forcing::General(g) => constrained
                .iter()
                .map(|&v| g(t, self.problem.mesh.vertices()[v]))
                .collect(),
        }
    }

    /// `F(t) - A u`.
    fn residual(&self, u: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut r = self.load(t)?;
        let au = self.a.mul_vec(u);
        for (ri, ai) in r.iter_mut().zip(&au) {
            *ri -= ai;
        }
        Ok(r)
    }

    fn mass_apply(&self, u: &[f64]) -> Vec<f64> {
        match &self.consistent {
            Some(m) => m.mul_vec(u),
            None => self.lumped.mul_vec(u),
        }
    }

    /// Vector equal to `new - u` on constrained vertices and 0 elsewhere.
    fn boundary_jump(&self, u: &[f64], new: &[f64]) -> Vec<f64> {
        let mut d = vec![0.0; u.len()];
        for (&v, &g) in self.dofs.constrained().iter().zip(new) {
            d[v] = g - u[v];
        }
        d
    }

    /// `U^{n+1}` from `M (U^{n+1} - U^n) = r` on free rows and the given
    /// boundary values.
    fn explicit_update(&self, u: &[f64], r: &[f64], boundary: &[f64]) -> Result<FieldVector> {
        let mut next = u.to_vec();
        match &self.mass_ff {
            None => {
                let m = self.lumped.values();
                for &v in self.dofs.free() {
                    next[v] += r[v] / m[v];
                }
            }
            Some(mff) => {
                let coupling = self.mass_apply(&self.boundary_jump(u, boundary));
                let rhs: Vec<f64> = self.dofs.free().iter().map(|&v| r[v] - coupling[v]).collect();
                let du = solve_spd_from(mff, &rhs, &vec![0.0; rhs.len()], &self.cg)?.x;
                for (&v, d) in self.dofs.free().iter().zip(du) {
                    next[v] += d;
                }
            }
        }
        for (&v, &g) in self.dofs.constrained().iter().zip(boundary) {
            next[v] = g;
        }
        Ok(next)
    }

    /// `U^{n+1} = U^n + dt M^-1 (F^n - A U^n)`.
    pub fn explicit_euler(&self, u: &[f64], t: f64) -> Result<FieldVector> {
        let mut r = self.residual(u, t)?;
        r.iter_mut().for_each(|v| *v *= self.dt);
        self.explicit_update(u, &r, &self.boundary(t + self.dt))
    }

    /// Explicit Euler predictor followed by the trapezoidal corrector.
    pub fn heun(&self, u: &[f64], t: f64) -> Result<FieldVector> {
        let boundary = self.boundary(t + self.dt);
        let r0 = self.residual(u, t)?;
        let scaled: Vec<f64> = r0.iter().map(|v| v * self.dt).collect();
        let predicted = self.explicit_update(u, &scaled, &boundary)?;
        let r1 = self.residual(&predicted, t + self.dt)?;
        let r: Vec<f64> = r0.iter().zip(&r1).map(|(a, b)| 0.5 * self.dt * (a + b)).collect();
        self.explicit_update(u, &r, &boundary)
    }

    /// `(M + dt/2 A) U^{n+1} = (M - dt/2 A) U^n + dt/2 (F^n + F^{n+1})`.
    pub fn crank_nicolson(&self, u: &[f64], t: f64) -> Result<FieldVector> {
        let k = self
            .cn_ff
            .as_ref()
            .ok_or(Error::UnsupportedScheme("stepper was not built for Crank-Nicolson"))?;
        let half = 0.5 * self.dt;
        let boundary = self.boundary(t + self.dt);
        let f0 = self.load(t)?;
        let f1 = self.load(t + self.dt)?;
        let mu = self.mass_apply(u);
        let au = self.a.mul_vec(u);
        let mut lift = vec![0.0; u.len()];
        for (&v, &g) in self.dofs.constrained().iter().zip(&boundary) {
            lift[v] = g;
        }
        let ml = self.mass_apply(&lift);
        let al = self.a.mul_vec(&lift);
        let rhs: Vec<f64> = self
            .dofs
            .free()
            .iter()
            .map(|&v| mu[v] - half * au[v] + half * (f0[v] + f1[v]) - ml[v] - half * al[v])
            .collect();
        let start = self.dofs.restrict(u);
        let free = solve_spd_from(k, &rhs, &start, &self.cg)?.x;
        Ok(self.dofs.expand(&free, &lift))
    }

    /// Step of the configured scheme from `t` to `t + dt`.
    pub fn step(&self, u: &[f64], t: f64) -> Result<FieldVector> {
        if u.len() != self.dofs.n_total() {
            return Err(Error::DimensionMismatch {
                expected: self.dofs.n_total(),
                found: u.len(),
            });
        }
        match self.scheme.kind {
            SchemeKind::ExplicitEuler => self.explicit_euler(u, t),
            SchemeKind::Heun => self.heun(u, t),
            SchemeKind::CrankNicolson => self.crank_nicolson(u, t),
        }
    }
}
