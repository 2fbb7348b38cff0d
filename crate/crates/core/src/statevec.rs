//! Dense state-vector simulator for small circuits built from single-qubit
//! rotations, bit flips and controlled-Z gates.
//!
//! Qubit 0 is the most significant bit of a basis-state index, so on four
//! qubits the basis state `|1000⟩` has index 8. Observables are weighted sums
//! of Pauli-Z strings, which are diagonal in the computational basis.
//!
//! Gradients of expectation values are computed with a reverse (adjoint) sweep
//! over the circuit. [`param_shift_gradient`] evaluates the same derivatives
//! by the two-point shift rule and is kept as an independent check.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    X,
    Cz,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }
}

/// Where a rotation gate takes its angle from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleBinding {
    /// Fixed angle in radians.
    Constant(f64),
    /// Index into the angle vector supplied at run time.
    Slot(usize),
}

impl AngleBinding {
    fn resolve(self, angles: &[f64]) -> Result<f64> {
        match self {
            AngleBinding::Constant(value) => Ok(value),
            AngleBinding::Slot(slot) => angles.get(slot).copied().ok_or(Error::UnresolvedSlot {
                slot,
                available: angles.len(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    /// Second qubit of a CZ gate.
    pub control: Option<usize>,
    pub angle: Option<AngleBinding>,
}

impl Gate {
    pub fn rx(target: usize, angle: AngleBinding) -> Self {
        Self::rotation(GateKind::Rx, target, angle)
    }

    pub fn ry(target: usize, angle: AngleBinding) -> Self {
        Self::rotation(GateKind::Ry, target, angle)
    }

    pub fn rz(target: usize, angle: AngleBinding) -> Self {
        Self::rotation(GateKind::Rz, target, angle)
    }

    pub fn rotation(kind: GateKind, target: usize, angle: AngleBinding) -> Self {
        debug_assert!(kind.is_rotation());
        Gate {
            kind,
            target,
            control: None,
            angle: Some(angle),
        }
    }

    pub fn x(target: usize) -> Self {
        Gate {
            kind: GateKind::X,
            target,
            control: None,
            angle: None,
        }
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cz,
            target,
            control: Some(control),
            angle: None,
        }
    }

    /// Checks the structural invariants of the gate against a register size.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.target >= n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: self.target,
                n_qubits,
            });
        }
        match self.kind {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => {
                if self.angle.is_none() || self.control.is_some() {
                    return Err(Error::MalformedGate(format!(
                        "{:?} needs an angle and no control",
                        self.kind
                    )));
                }
            }
            GateKind::X => {
                if self.angle.is_some() || self.control.is_some() {
                    return Err(Error::MalformedGate("X takes no angle or control".into()));
                }
            }
            GateKind::Cz => {
                let control = self
                    .control
                    .ok_or_else(|| Error::MalformedGate("CZ needs a control qubit".into()))?;
                if self.angle.is_some() {
                    return Err(Error::MalformedGate("CZ takes no angle".into()));
                }
                if control >= n_qubits {
                    return Err(Error::QubitOutOfRange {
                        qubit: control,
                        n_qubits,
                    });
                }
                if control == self.target {
                    return Err(Error::MalformedGate(format!(
                        "CZ control and target are both qubit {control}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn slot(&self) -> Option<usize> {
        match self.angle {
            Some(AngleBinding::Slot(slot)) => Some(slot),
            _ => None,
        }
    }
}

/// Ordered gate list acting on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitProgram {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl CircuitProgram {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        Ok(CircuitProgram {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn with_capacity(n_qubits: usize, capacity: usize) -> Result<Self> {
        let mut circuit = Self::new(n_qubits)?;
        circuit.gates.reserve(capacity);
        Ok(circuit)
    }

    /// Appends a gate after validating it against the register.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// One past the largest slot index referenced by any gate.
    pub fn n_slots(&self) -> usize {
        self.gates
            .iter()
            .filter_map(Gate::slot)
            .map(|s| s + 1)
            .max()
            .unwrap_or(0)
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::RegisterSize {
            n_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// One weighted Pauli-Z string. An empty qubit list is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ZTerm {
    pub coefficient: f64,
    pub qubits: Vec<usize>,
}

/// Weighted sum of Pauli-Z strings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Observable {
    pub terms: Vec<ZTerm>,
}

impl Observable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unit-weight product of Z operators on the given qubits.
    pub fn z_string(qubits: &[usize]) -> Self {
        Observable::new().with_term(1.0, qubits)
    }

    pub fn with_term(mut self, coefficient: f64, qubits: &[usize]) -> Self {
        self.terms.push(ZTerm {
            coefficient,
            qubits: qubits.to_vec(),
        });
        self
    }

    /// Sum of absolute coefficients, which bounds |⟨O⟩|.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        for term in &self.terms {
            if let Some(&qubit) = term.qubits.iter().find(|&&q| q >= n_qubits) {
                return Err(Error::QubitOutOfRange { qubit, n_qubits });
            }
        }
        Ok(())
    }

    /// Diagonal of the observable in the computational basis.
    fn diagonal(&self, n_qubits: usize) -> Result<Vec<f64>> {
        self.validate(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut diag = vec![0.0; dim];
        for term in &self.terms {
            let mask = term
                .qubits
                .iter()
                .fold(0usize, |m, &q| m ^ qubit_mask(n_qubits, q));
            for (index, d) in diag.iter_mut().enumerate() {
                let sign = if (index & mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                *d += term.coefficient * sign;
            }
        }
        Ok(diag)
    }
}

#[inline]
fn qubit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zero basis state `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state with the given index (qubit 0 is the MSB).
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero(n_qubits)?;
        if index >= state.amplitudes.len() {
            return Err(Error::BasisIndex {
                index,
                dim: state.amplitudes.len(),
            });
        }
        state.amplitudes[0] = ZERO;
        state.amplitudes[index] = ONE;
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies one gate in place, resolving slot-bound angles from `angles`.
    pub fn apply_gate(&mut self, gate: &Gate, angles: &[f64]) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match gate.angle {
            Some(binding) => {
                let angle = binding.resolve(angles)?;
                self.apply_rotation(gate.kind, gate.target, angle);
            }
            None => self.apply_fixed(gate),
        }
        Ok(())
    }

    fn apply_fixed(&mut self, gate: &Gate) {
        match gate.kind {
            GateKind::X => {
                let mask = qubit_mask(self.n_qubits, gate.target);
                for i0 in (0..self.amplitudes.len()).filter(|i| i & mask == 0) {
                    self.amplitudes.swap(i0, i0 | mask);
                }
            }
            GateKind::Cz => {
                let control = gate.control.expect("validated CZ");
                let mask = qubit_mask(self.n_qubits, gate.target)
                    | qubit_mask(self.n_qubits, control);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            _ => unreachable!("rotations carry an angle"),
        }
    }

    /// Applies `exp(-i·angle·P/2)` for the rotation's Pauli axis `P`.
    fn apply_rotation(&mut self, kind: GateKind, target: usize, angle: f64) {
        let mask = qubit_mask(self.n_qubits, target);
        let (s, c) = (0.5 * angle).sin_cos();
        let dim = self.amplitudes.len();
        let amps = &mut self.amplitudes;
        match kind {
            GateKind::Rx => {
                let mis = Complex64::new(0.0, -s);
                for i0 in (0..dim).filter(|i| i & mask == 0) {
                    let (a, b) = (amps[i0], amps[i0 | mask]);
                    amps[i0] = a * c + b * mis;
                    amps[i0 | mask] = a * mis + b * c;
                }
            }
            GateKind::Ry => {
                for i0 in (0..dim).filter(|i| i & mask == 0) {
                    let (a, b) = (amps[i0], amps[i0 | mask]);
                    amps[i0] = a * c - b * s;
                    amps[i0 | mask] = a * s + b * c;
                }
            }
            GateKind::Rz => {
                let phase0 = Complex64::new(c, -s);
                let phase1 = Complex64::new(c, s);
                for (i, amp) in amps.iter_mut().enumerate() {
                    *amp *= if i & mask == 0 { phase0 } else { phase1 };
                }
            }
            _ => unreachable!("not a rotation"),
        }
    }

    /// Applies the inverse of `gate`. Every gate here is its own inverse up to
    /// negating the rotation angle.
    fn apply_inverse(&mut self, gate: &Gate, angles: &[f64]) -> Result<()> {
        match gate.angle {
            Some(binding) => {
                let angle = binding.resolve(angles)?;
                self.apply_rotation(gate.kind, gate.target, -angle);
            }
            None => self.apply_fixed(gate),
        }
        Ok(())
    }

    /// ⟨ψ|O|ψ⟩ for a Z-string observable.
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        let diag = obs.diagonal(self.n_qubits)?;
        Ok(diagonal_expectation(&self.amplitudes, &diag))
    }

    /// Expectations of several observables against the same state.
    pub fn expectations(&self, observables: &[Observable]) -> Result<Vec<f64>> {
        observables.iter().map(|o| self.expectation(o)).collect()
    }
}

fn diagonal_expectation(amplitudes: &[Complex64], diag: &[f64]) -> f64 {
    amplitudes
        .iter()
        .zip(diag)
        .map(|(a, d)| a.norm_sqr() * d)
        .sum()
}

/// Applies the circuit's gates in order to `|0…0⟩`.
pub fn run(circuit: &CircuitProgram, angles: &[f64]) -> Result<StateVector> {
    let mut state = StateVector::zero(circuit.n_qubits)?;
    for gate in &circuit.gates {
        state.apply_gate(gate, angles)?;
    }
    Ok(state)
}

/// Im⟨λ|P|ψ⟩ where `P` is the generator of the rotation on `target`.
fn generator_overlap_im(
    kind: GateKind,
    n_qubits: usize,
    target: usize,
    lambda: &[Complex64],
    psi: &[Complex64],
) -> f64 {
    let mask = qubit_mask(n_qubits, target);
    let mut acc = ZERO;
    for i0 in (0..psi.len()).filter(|i| i & mask == 0) {
        let i1 = i0 | mask;
        let (l0, l1) = (lambda[i0].conj(), lambda[i1].conj());
        let (p0, p1) = (psi[i0], psi[i1]);
        acc += match kind {
            GateKind::Rx => l0 * p1 + l1 * p0,
            // Y = [[0, -i], [i, 0]]
            GateKind::Ry => l0 * p1 * Complex64::new(0.0, -1.0) + l1 * p0 * Complex64::new(0.0, 1.0),
            GateKind::Rz => l0 * p0 - l1 * p1,
            _ => unreachable!("not a rotation"),
        };
    }
    acc.im
}

/// Exact ∂⟨O⟩/∂angle for every slot, by one forward and one reverse sweep.
///
/// The returned vector has one entry per slot of `angles`. Slots used by
/// several gates accumulate the contribution of each occurrence; slots not
/// referenced by the circuit get zero.
pub fn adjoint_gradients(
    circuit: &CircuitProgram,
    angles: &[f64],
    obs: &Observable,
) -> Result<Vec<f64>> {
    let mut psi = run(circuit, angles)?;
    let diag = obs.diagonal(circuit.n_qubits)?;
    let mut lambda = psi.clone();
    for (amp, d) in lambda.amplitudes.iter_mut().zip(&diag) {
        *amp *= *d;
    }

    let mut grads = vec![0.0; angles.len().max(circuit.n_slots())];
    for gate in circuit.gates.iter().rev() {
        // d/dθ exp(-iθP/2) = -i/2 · P · exp(-iθP/2), so the contribution of
        // this occurrence is 2·Re⟨λ|(-i/2)P|ψ⟩ = Im⟨λ|P|ψ⟩ at the post-gate point.
        if let Some(slot) = gate.slot() {
            grads[slot] += generator_overlap_im(
                gate.kind,
                circuit.n_qubits,
                gate.target,
                &lambda.amplitudes,
                &psi.amplitudes,
            );
        }
        psi.apply_inverse(gate, angles)?;
        lambda.apply_inverse(gate, angles)?;
    }
    grads.truncate(angles.len());
    Ok(grads)
}

/// ∂⟨O⟩/∂angle for one slot using the two-point shift rule, shifting each
/// occurrence of the slot separately and summing.
pub fn param_shift_gradient(
    circuit: &CircuitProgram,
    angles: &[f64],
    obs: &Observable,
    slot: usize,
) -> Result<f64> {
    let occurrences: Vec<usize> = circuit
        .gates
        .iter()
        .enumerate()
        .filter(|(_, g)| g.slot() == Some(slot))
        .map(|(i, _)| i)
        .collect();
    if occurrences.is_empty() {
        return Err(Error::SlotNotFound(slot));
    }
    let base = *angles.get(slot).ok_or(Error::UnresolvedSlot {
        slot,
        available: angles.len(),
    })?;

    let mut total = 0.0;
    let mut shifted = circuit.clone();
    for &index in &occurrences {
        let mut eval = |angle: f64| -> Result<f64> {
            shifted.gates[index].angle = Some(AngleBinding::Constant(angle));
            run(&shifted, angles)?.expectation(obs)
        };
        let plus = eval(base + FRAC_PI_2)?;
        let minus = eval(base - FRAC_PI_2)?;
        shifted.gates[index].angle = Some(AngleBinding::Slot(slot));
        total += 0.5 * (plus - minus);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    /// Equality up to a global phase.
    fn same_ray(a: &StateVector, b: &StateVector) -> bool {
        let overlap: Complex64 = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| x.conj() * y)
            .sum();
        close(overlap.norm(), 1.0, 1e-12)
    }

    #[test]
    fn x_on_qubit_zero_sets_most_significant_bit() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_gate(&Gate::x(0), &[]).unwrap();
        assert_eq!(s, StateVector::basis(2, 0b10).unwrap());
    }

    #[test]
    fn cz_negates_all_ones() {
        let mut s = StateVector::basis(2, 0b11).unwrap();
        s.apply_gate(&Gate::cz(0, 1), &[]).unwrap();
        assert_eq!(s.amplitudes()[3], -ONE);
        let mut t = StateVector::basis(2, 0b10).unwrap();
        t.apply_gate(&Gate::cz(0, 1), &[]).unwrap();
        assert_eq!(t.amplitudes()[2], ONE);
    }

    #[test]
    fn ry_pi_flips_to_one() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_gate(&Gate::ry(0, AngleBinding::Constant(PI)), &[])
            .unwrap();
        assert!(same_ray(&s, &StateVector::basis(1, 1).unwrap()));
        assert!(close(s.expectation(&Observable::z_string(&[0])).unwrap(), -1.0, 1e-12));
    }

    #[test]
    fn rx_and_rz_match_matrix_definitions() {
        let phi = 0.7;
        let mut s = StateVector::zero(1).unwrap();
        s.apply_gate(&Gate::rx(0, AngleBinding::Constant(phi)), &[]).unwrap();
        let a = s.amplitudes();
        assert!(close(a[0].re, (phi / 2.0).cos(), 1e-15) && close(a[0].im, 0.0, 1e-15));
        assert!(close(a[1].re, 0.0, 1e-15) && close(a[1].im, -(phi / 2.0).sin(), 1e-15));

        let mut t = StateVector::basis(1, 1).unwrap();
        t.apply_gate(&Gate::rz(0, AngleBinding::Constant(phi)), &[]).unwrap();
        let b = t.amplitudes()[1];
        assert!(close(b.re, (phi / 2.0).cos(), 1e-15) && close(b.im, (phi / 2.0).sin(), 1e-15));
    }

    #[test]
    fn empty_circuit_is_all_zero_state() {
        let c = CircuitProgram::new(4).unwrap();
        assert_eq!(run(&c, &[]).unwrap(), StateVector::zero(4).unwrap());
    }

    #[test]
    fn single_ry_expectation_is_cosine() {
        let mut c = CircuitProgram::new(1).unwrap();
        c.push(Gate::ry(0, AngleBinding::Slot(0))).unwrap();
        let e = run(&c, &[FRAC_PI_3]).unwrap().expectation(&Observable::z_string(&[0])).unwrap();
        assert!(close(e, 0.5, 1e-12));
    }

    #[test]
    fn z_string_expectations_on_basis_and_superposition() {
        let s = StateVector::zero(4).unwrap();
        assert_eq!(s.expectation(&Observable::z_string(&[0, 1])).unwrap(), 1.0);
        let t = StateVector::basis(4, 0b1000).unwrap();
        assert_eq!(t.expectation(&Observable::z_string(&[0])).unwrap(), -1.0);

        let mut c = CircuitProgram::new(2).unwrap();
        c.push(Gate::ry(0, AngleBinding::Constant(FRAC_PI_2))).unwrap();
        let u = run(&c, &[]).unwrap();
        assert!(close(u.expectation(&Observable::z_string(&[0, 1])).unwrap(), 0.0, 1e-12));
    }

    #[test]
    fn identity_term_returns_coefficient() {
        let s = StateVector::basis(3, 5).unwrap();
        let obs = Observable::new().with_term(2.5, &[]);
        assert_eq!(s.expectation(&obs).unwrap(), 2.5);
    }

    #[test]
    fn adjoint_single_ry() {
        let mut c = CircuitProgram::new(1).unwrap();
        c.push(Gate::ry(0, AngleBinding::Slot(0))).unwrap();
        let g = adjoint_gradients(&c, &[FRAC_PI_3], &Observable::z_string(&[0])).unwrap();
        assert!(close(g[0], -(FRAC_PI_3).sin(), 1e-12));
    }

    #[test]
    fn param_shift_examples() {
        let z = Observable::z_string(&[0]);
        let mut c = CircuitProgram::new(1).unwrap();
        c.push(Gate::ry(0, AngleBinding::Slot(0))).unwrap();
        assert!(close(param_shift_gradient(&c, &[0.0], &z, 0).unwrap(), 0.0, 1e-12));
        assert!(close(param_shift_gradient(&c, &[FRAC_PI_2], &z, 0).unwrap(), -1.0, 1e-12));

        // ⟨Z⟩ = cos(2θ) for a shared slot used twice, so d⟨Z⟩/dθ = -2·sin(2θ).
        c.push(Gate::ry(0, AngleBinding::Slot(0))).unwrap();
        let ps = param_shift_gradient(&c, &[FRAC_PI_4], &z, 0).unwrap();
        let adj = adjoint_gradients(&c, &[FRAC_PI_4], &z).unwrap()[0];
        assert!(close(ps, -2.0, 1e-12));
        assert!(close(adj, -2.0, 1e-12));
        // each occurrence on its own contributes -sin(π/2) = -1
        let e = |t: f64| run(&c, &[t]).unwrap().expectation(&z).unwrap();
        assert!(close(e(FRAC_PI_4), 0.0, 1e-12));
    }

    #[test]
    fn constant_angles_get_no_gradient_entry() {
        let mut c = CircuitProgram::new(1).unwrap();
        c.push(Gate::rx(0, AngleBinding::Constant(0.3))).unwrap();
        c.push(Gate::ry(0, AngleBinding::Slot(0))).unwrap();
        let g = adjoint_gradients(&c, &[0.2], &Observable::z_string(&[0])).unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn errors_for_bad_indices_and_slots() {
        let mut c = CircuitProgram::new(2).unwrap();
        assert!(matches!(c.push(Gate::x(2)), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(c.push(Gate::cz(1, 1)), Err(Error::MalformedGate(_))));
        c.push(Gate::ry(0, AngleBinding::Slot(3))).unwrap();
        assert!(matches!(run(&c, &[0.0]), Err(Error::UnresolvedSlot { slot: 3, .. })));
        assert!(matches!(
            param_shift_gradient(&c, &[0.0; 4], &Observable::z_string(&[0]), 1),
            Err(Error::SlotNotFound(1))
        ));
        let s = StateVector::zero(2).unwrap();
        assert!(s.expectation(&Observable::z_string(&[5])).is_err());
        assert!(StateVector::zero(13).is_err());
        assert!(StateVector::zero(0).is_err());
    }
}
