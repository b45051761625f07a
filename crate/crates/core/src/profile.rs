//! Stored trajectories: `(r, u, u', v, v')` samples on an increasing grid,
//! cubic Hermite evaluation between nodes, and CSV round-tripping.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::scalar::Scalar;

/// A radial trajectory sampled at the integrator's accepted steps.
///
/// Grids are strictly increasing and start at the solver's offset radius,
/// never at `r = 0` itself (the drift term `(n-1)/r u'` is singular there;
/// the first node carries the Taylor-consistent state instead).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<S: Scalar> {
    params: Parameters<S>,
    grid: Vec<S>,
    u: Vec<S>,
    du: Vec<S>,
    v: Vec<S>,
    dv: Vec<S>,
}

impl<S: Scalar> RadialProfile<S> {
    pub fn from_samples(
        params: Parameters<S>,
        grid: Vec<S>,
        u: Vec<S>,
        du: Vec<S>,
        v: Vec<S>,
        dv: Vec<S>,
    ) -> Result<Self> {
        let len = grid.len();
        if len < 2 {
            return Err(Error::MalformedProfile(format!(
                "profile needs at least 2 samples, got {len}"
            )));
        }
        if [u.len(), du.len(), v.len(), dv.len()].iter().any(|&l| l != len) {
            return Err(Error::MalformedProfile(format!(
                "column lengths differ: r {len}, u {}, du {}, v {}, dv {}",
                u.len(),
                du.len(),
                v.len(),
                dv.len()
            )));
        }
        if !(grid[0] >= S::zero()) {
            return Err(Error::MalformedProfile(format!("grid starts at {} < 0", grid[0])));
        }
        for i in 1..len {
            if !(grid[i] > grid[i - 1]) {
                return Err(Error::MalformedProfile(format!(
                    "grid not strictly increasing at index {i}: {} then {}",
                    grid[i - 1],
                    grid[i]
                )));
            }
        }
        for (name, col) in [("r", &grid), ("u", &u), ("du", &du), ("v", &v), ("dv", &dv)] {
            if let Some(i) = col.iter().position(|x| !x.is_finite()) {
                return Err(Error::MalformedProfile(format!(
                    "non-finite {name} value at index {i}"
                )));
            }
        }
        Ok(RadialProfile { params, grid, u, du, v, dv })
    }

    pub fn params(&self) -> &Parameters<S> {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires >= 2 samples
    }

    pub fn grid(&self) -> &[S] {
        &self.grid
    }

    pub fn u(&self) -> &[S] {
        &self.u
    }

    pub fn du(&self) -> &[S] {
        &self.du
    }

    pub fn v(&self) -> &[S] {
        &self.v
    }

    pub fn dv(&self) -> &[S] {
        &self.dv
    }

    pub fn r0(&self) -> S {
        self.grid[0]
    }

    pub fn r_end(&self) -> S {
        *self.grid.last().unwrap()
    }

    /// State at the last node, as `[u, du, v, dv]`.
    pub fn final_state(&self) -> [S; 4] {
        let i = self.len() - 1;
        [self.u[i], self.du[i], self.v[i], self.dv[i]]
    }

    /// Cubic Hermite interpolation of `[u, du, v, dv]` at `r`, which must
    /// lie within the stored grid range.
    pub fn eval(&self, r: S) -> Result<[S; 4]> {
        if !(r >= self.r0() && r <= self.r_end()) {
            return Err(Error::MalformedProfile(format!(
                "evaluation radius {r} outside stored range [{}, {}]",
                self.r0(),
                self.r_end()
            )));
        }
        // Index of the left node of the bracketing interval.
        let k = match self.grid.binary_search_by(|g| g.partial_cmp(&r).unwrap()) {
            Ok(i) => return Ok([self.u[i], self.du[i], self.v[i], self.dv[i]]),
            Err(i) => i - 1,
        };
        let h = self.grid[k + 1] - self.grid[k];
        let t = (r - self.grid[k]) / h;
        let (u, du) = hermite_cubic(self.u[k], self.du[k], self.u[k + 1], self.du[k + 1], h, t);
        let (v, dv) = hermite_cubic(self.v[k], self.dv[k], self.v[k + 1], self.dv[k + 1], h, t);
        Ok([u, du, v, dv])
    }

    /// The swapped trajectory `(v, u)`; exact, no recomputation.
    pub fn swap(&self) -> Self {
        RadialProfile {
            params: self.params,
            grid: self.grid.clone(),
            u: self.v.clone(),
            du: self.dv.clone(),
            v: self.u.clone(),
            dv: self.du.clone(),
        }
    }

    /// Scales the components by `(c1, c2)`: `(u, v) -> (c1 u, c2 v)`.
    pub fn component_scaled(&self, c1: S, c2: S) -> Self {
        RadialProfile {
            params: self.params,
            grid: self.grid.clone(),
            u: self.u.iter().map(|&x| c1 * x).collect(),
            du: self.du.iter().map(|&x| c1 * x).collect(),
            v: self.v.iter().map(|&x| c2 * x).collect(),
            dv: self.dv.iter().map(|&x| c2 * x).collect(),
        }
    }

    /// Writes the trajectory as CSV with header `r,u,du,v,dv`. Values are
    /// printed with 17 significant digits so f64 round-trips exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,u,du,v,dv")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid[i].as_f64(),
                self.u[i].as_f64(),
                self.du[i].as_f64(),
                self.v[i].as_f64(),
                self.dv[i].as_f64()
            )?;
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads a trajectory from CSV produced by [`Self::write_csv`]. The
    /// parameters are not stored in the CSV and must be supplied.
    pub fn read_csv<R: Read>(params: Parameters<S>, r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Csv("empty file".into()))??;
        if header.trim() != "r,u,du,v,dv" {
            return Err(Error::Csv(format!("expected header r,u,du,v,dv, got {header:?}")));
        }
        let mut cols: [Vec<S>; 5] = Default::default();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            for col in cols.iter_mut() {
                let field = fields.next().ok_or_else(|| {
                    Error::Csv(format!("row {}: expected 5 fields", lineno + 2))
                })?;
                let x: f64 = field.trim().parse().map_err(|e| {
                    Error::Csv(format!("row {}: bad number {field:?}: {e}", lineno + 2))
                })?;
                col.push(S::of(x));
            }
            if fields.next().is_some() {
                return Err(Error::Csv(format!("row {}: more than 5 fields", lineno + 2)));
            }
        }
        let [grid, u, du, v, dv] = cols;
        RadialProfile::from_samples(params, grid, u, du, v, dv)
    }

    pub fn read_csv_path(params: Parameters<S>, path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(params, f)
    }
}

/// Value and derivative of the cubic Hermite interpolant on one interval.
/// `t` is the normalized coordinate in `[0, 1]`, `h` the interval width.
pub(crate) fn hermite_cubic<S: Scalar>(y0: S, d0: S, y1: S, d1: S, h: S, t: S) -> (S, S) {
    let one = S::one();
    let two = S::of(2.0);
    let three = S::of(3.0);
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = two * t3 - three * t2 + one;
    let h10 = t3 - two * t2 + t;
    let h01 = -two * t3 + three * t2;
    let h11 = t3 - t2;
    let y = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let g00 = (S::of(6.0) * t2 - S::of(6.0) * t) / h;
    let g10 = three * t2 - S::of(4.0) * t + one;
    let g01 = (S::of(6.0) * t - S::of(6.0) * t2) / h;
    let g11 = three * t2 - two * t;
    let dy = g00 * y0 + g10 * d0 + g01 * y1 + g11 * d1;
    (y, dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> Parameters<f64> {
        Parameters::new(1, 2.0, 1.0).unwrap()
    }

    fn cubic_profile() -> RadialProfile<f64> {
        // u = r^3 - 2r, v = 0.5 r^2; cubic Hermite is exact on cubics.
        let grid: Vec<f64> = (0..20).map(|i| 0.1 + 0.17 * i as f64).collect();
        let u = grid.iter().map(|r| r.powi(3) - 2.0 * r).collect();
        let du = grid.iter().map(|r| 3.0 * r * r - 2.0).collect();
        let v = grid.iter().map(|r| 0.5 * r * r).collect();
        let dv = grid.iter().map(|r| *r).collect();
        RadialProfile::from_samples(params(), grid, u, du, v, dv).unwrap()
    }

    #[test]
    fn from_samples_validation() {
        let p = params();
        let bad_len = RadialProfile::from_samples(
            p,
            vec![0.1, 0.2],
            vec![1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
        );
        assert!(matches!(bad_len, Err(Error::MalformedProfile(_))));
        let not_increasing = RadialProfile::from_samples(
            p,
            vec![0.1, 0.1],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
        );
        assert!(matches!(not_increasing, Err(Error::MalformedProfile(_))));
        let nan = RadialProfile::from_samples(
            p,
            vec![0.1, 0.2],
            vec![1.0, f64::NAN],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
        );
        assert!(matches!(nan, Err(Error::MalformedProfile(_))));
    }

    #[test]
    fn eval_exact_at_nodes() {
        let p = cubic_profile();
        for i in 0..p.len() {
            let r = p.grid()[i];
            let s = p.eval(r).unwrap();
            assert_eq!(s, [p.u()[i], p.du()[i], p.v()[i], p.dv()[i]]);
        }
    }

    #[test]
    fn eval_exact_on_cubics_between_nodes() {
        let p = cubic_profile();
        let mut r = p.r0();
        while r < p.r_end() {
            let [u, du, v, dv] = p.eval(r).unwrap();
            assert!((u - (r.powi(3) - 2.0 * r)).abs() < 1e-12, "u at {r}");
            assert!((du - (3.0 * r * r - 2.0)).abs() < 1e-11, "du at {r}");
            assert!((v - 0.5 * r * r).abs() < 1e-12, "v at {r}");
            assert!((dv - r).abs() < 1e-12, "dv at {r}");
            r += 0.0173;
        }
        assert!(p.eval(p.r0() - 0.01).is_err());
        assert!(p.eval(p.r_end() + 0.01).is_err());
    }

    #[test]
    fn swap_is_exact_involution() {
        let p = cubic_profile();
        let s = p.swap();
        assert_eq!(s.u(), p.v());
        assert_eq!(s.dv(), p.du());
        assert_eq!(s.swap(), p);
    }

    #[test]
    fn component_scaling() {
        let p = cubic_profile();
        let s = p.component_scaled(2.0, -0.5);
        for i in 0..p.len() {
            assert_eq!(s.u()[i], 2.0 * p.u()[i]);
            assert_eq!(s.dv()[i], -0.5 * p.dv()[i]);
        }
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let p = cubic_profile();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("r,u,du,v,dv\n"));
        let back = RadialProfile::read_csv(params(), &buf[..]).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        let p = params();
        assert!(RadialProfile::<f64>::read_csv(p, &b""[..]).is_err());
        assert!(RadialProfile::<f64>::read_csv(p, &b"x,y\n1,2\n"[..]).is_err());
        let bad_field = b"r,u,du,v,dv\n0.1,1.0,zzz,1.0,0.0\n0.2,1.0,0.0,1.0,0.0\n";
        assert!(matches!(
            RadialProfile::<f64>::read_csv(p, &bad_field[..]),
            Err(Error::Csv(_))
        ));
    }

    proptest! {
        #[test]
        fn csv_roundtrip_random_profiles(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let len = rng.gen_range(2..40usize);
            let mut grid = Vec::with_capacity(len);
            let mut r = rng.gen_range(1e-4..0.1);
            for _ in 0..len {
                grid.push(r);
                r += rng.gen_range(1e-3..0.5);
            }
            let col = |rng: &mut rand_chacha::ChaCha8Rng| {
                (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect::<Vec<f64>>()
            };
            let (u, du, v, dv) = (col(&mut rng), col(&mut rng), col(&mut rng), col(&mut rng));
            let p = RadialProfile::from_samples(params(), grid, u, du, v, dv).unwrap();
            let mut buf = Vec::new();
            p.write_csv(&mut buf).unwrap();
            let back = RadialProfile::read_csv(params(), &buf[..]).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
