//! Nodal AC solver for [`GmCNetlist`]s.
//!
//! Each non-ground node contributes one KCL row (sum of currents leaving the
//! node is zero). Source-driven nodes have their row replaced by
//! `v(node) = value`. The resulting dense complex system is solved by
//! Gaussian elimination with partial pivoting after row equilibration.
//! Nothing here knows about closed-form transfer functions.

use num_complex::Complex;

use crate::analysis::FrequencyResponse;
use crate::error::{Error, Result};
use crate::netlist::{GmCNetlist, NodeId, Probe};
use crate::scalar::hz_to_rad;
use crate::Scalar;

/// `A·v = b` over the non-ground nodes; row/column `k` is node `k + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrixSystem<T> {
    n: usize,
    a: Vec<Complex<T>>,
    b: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrixSystem<T> {
    pub fn zeros(n: usize) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self {
            n,
            a: vec![z; n * n],
            b: vec![z; n],
        }
    }

    /// Builds from a row-major matrix and right-hand side.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>, b: Vec<Complex<T>>) -> Self {
        let n = b.len();
        assert!(
            rows.len() == n && rows.iter().all(|r| r.len() == n),
            "matrix must be n×n"
        );
        Self {
            n,
            a: rows.into_iter().flatten().collect(),
            b,
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.a[row * self.n + col]
    }

    pub fn rhs(&self) -> &[Complex<T>] {
        &self.b
    }

    /// Adds `v` at the entry for nodes `(row, col)`; ground terms are dropped.
    fn add(&mut self, row: NodeId, col: NodeId, v: Complex<T>) {
        if row.is_ground() || col.is_ground() {
            return;
        }
        let idx = (row.0 - 1) * self.n + (col.0 - 1);
        self.a[idx] = self.a[idx] + v;
    }

    fn add_admittance(&mut self, a: NodeId, b: NodeId, y: Complex<T>) {
        self.add(a, a, y);
        self.add(a, b, -y);
        self.add(b, a, -y);
        self.add(b, b, y);
    }

    /// `‖A·v − b‖∞`.
    pub fn residual_inf(&self, v: &[Complex<T>]) -> T {
        (0..self.n)
            .map(|i| {
                let row = &self.a[i * self.n..(i + 1) * self.n];
                let av = row
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&x, &y)| acc + x * y);
                (av - self.b[i]).norm()
            })
            .fold(T::zero(), T::max)
    }
}

/// Solver knobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions<T> {
    /// A pivot smaller than this fraction of its column's largest
    /// (row-equilibrated) entry is treated as zero.
    pub pivot_tolerance: T,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            pivot_tolerance: T::lit(1e-14),
        }
    }
}

/// Assembles the nodal system at angular frequency `omega` with unit excitation.
pub fn stamp<T: Scalar>(netlist: &GmCNetlist<T>, omega: T) -> ComplexMatrixSystem<T> {
    stamp_with_excitation(netlist, omega, T::one())
}

/// Assembles the nodal system with every source scaled by `excitation`.
pub fn stamp_with_excitation<T: Scalar>(netlist: &GmCNetlist<T>, omega: T, excitation: T) -> ComplexMatrixSystem<T> {
    let n = netlist.node_count() - 1;
    let mut sys = ComplexMatrixSystem::zeros(n);
    let zero = T::zero();

    for c in netlist.capacitors() {
        sys.add_admittance(c.a, c.b, Complex::new(zero, omega * c.c));
    }
    for g in netlist.conductances() {
        sys.add_admittance(g.a, g.b, Complex::new(g.g, zero));
    }
    for t in netlist.transconductors() {
        // gm·(v+ − v−) enters out_src and leaves out_snk.
        let gm = Complex::new(t.gm, zero);
        sys.add(t.out_src, t.v_plus, -gm);
        sys.add(t.out_src, t.v_minus, gm);
        sys.add(t.out_snk, t.v_plus, gm);
        sys.add(t.out_snk, t.v_minus, -gm);
    }
    for s in netlist.sources() {
        let row = s.node.0 - 1;
        for col in 0..n {
            sys.a[row * n + col] = Complex::new(zero, zero);
        }
        sys.a[row * n + row] = Complex::new(T::one(), zero);
        sys.b[row] = Complex::new(s.value * excitation, zero);
    }
    sys
}

/// Solves `A·v = b`. A pivot below tolerance reports the node of its column.
pub fn solve<T: Scalar>(system: &ComplexMatrixSystem<T>, options: &SolveOptions<T>) -> Result<Vec<Complex<T>>> {
    let n = system.n;
    let mut a = system.a.clone();
    let mut b = system.b.clone();

    for i in 0..n {
        let scale = a[i * n..(i + 1) * n].iter().map(|x| x.norm()).fold(T::zero(), T::max);
        if scale.is_zero() {
            return Err(Error::SingularSystem { node: i + 1 });
        }
        let inv = scale.recip();
        for x in &mut a[i * n..(i + 1) * n] {
            *x = *x * inv;
        }
        b[i] = b[i] * inv;
    }

    let col_max: Vec<T> = (0..n)
        .map(|k| (0..n).map(|i| a[i * n + k].norm()).fold(T::zero(), T::max))
        .collect();

    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|i| (i, a[i * n + k].norm()))
            .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pmag > options.pivot_tolerance * col_max[k]) || pmag.is_zero() {
            return Err(Error::SingularSystem { node: k + 1 });
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        let pivot = a[k * n + k];
        for i in (k + 1)..n {
            let f = a[i * n + k] / pivot;
            if f.norm().is_zero() {
                continue;
            }
            a[i * n + k] = Complex::new(T::zero(), T::zero());
            for j in (k + 1)..n {
                a[i * n + j] = a[i * n + j] - f * a[k * n + j];
            }
            b[i] = b[i] - f * b[k];
        }
    }

    let mut v = vec![Complex::new(T::zero(), T::zero()); n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in (k + 1)..n {
            acc = acc - a[k * n + j] * v[j];
        }
        v[k] = acc / a[k * n + k];
    }
    Ok(v)
}

/// Node voltages (index `k` is node `k`, ground included as zero) at one
/// angular frequency.
pub fn node_voltages<T: Scalar>(
    netlist: &GmCNetlist<T>,
    omega: T,
    options: &SolveOptions<T>,
) -> Result<Vec<Complex<T>>> {
    let v = solve(&stamp(netlist, omega), options)?;
    let mut all = Vec::with_capacity(v.len() + 1);
    all.push(Complex::new(T::zero(), T::zero()));
    all.extend(v);
    Ok(all)
}

/// Reads a probe from a full node-voltage vector.
pub fn read_probe<T: Scalar>(netlist: &GmCNetlist<T>, probe: Probe, voltages: &[Complex<T>]) -> Complex<T> {
    match probe {
        Probe::Node(a) => voltages[a.0],
        Probe::Differential(a, b) => voltages[a.0] - voltages[b.0],
        Probe::Current(i) => {
            let t = &netlist.transconductors()[i];
            (voltages[t.v_plus.0] - voltages[t.v_minus.0]) * t.gm
        }
    }
}

/// Probe transfer function on a grid of frequencies in Hz.
pub fn response<T: Scalar>(netlist: &GmCNetlist<T>, probe_label: &str, grid: &[T]) -> Result<FrequencyResponse<T>> {
    response_with(netlist, probe_label, grid, &SolveOptions::default())
}

pub fn response_with<T: Scalar>(
    netlist: &GmCNetlist<T>,
    probe_label: &str,
    grid: &[T],
    options: &SolveOptions<T>,
) -> Result<FrequencyResponse<T>> {
    let probe = netlist.probe(probe_label)?;
    let entries = grid
        .iter()
        .map(|&f| {
            node_voltages(netlist, hz_to_rad(f), options)
                .map(|v| (f, read_probe(netlist, probe, &v)))
                .map_err(|e| e.at_frequency(f.to_f64_lossy()))
        })
        .collect::<Result<Vec<_>>>()?;
    FrequencyResponse::new(entries)
}
