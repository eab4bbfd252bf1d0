use serde::{Deserialize, Serialize};

use super::layout::StateLayout;
use super::ObjectiveKind;
use crate::error::{Error, Result};
use crate::grid_model::{
    per_unit_normalize, BranchAdmittance, ControlMode, CurrentKind, GridMode, NetworkModel,
};
use crate::nlp::{NlpProblem, Scalar};
use crate::scenario::{apply_opf_scenario, OpfScenario};

/// Small tie-breaking terms added to the solver objective (never to
/// [`OpfProblem::objective_value`]).
///
/// Several optima of the bare objectives are non-unique: converter flows can
/// circulate, and reactive power can be traded between the external grid and
/// local sources. The regularization selects the point with the least
/// converter throughput and no reactive exchange with the external grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    /// Weight on `Σ (F_fwd + F_rev)`, per-unit.
    pub flow: f64,
    /// Weight on `Σ Q_grid²`, per-unit.
    pub grid_reactive: f64,
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization {
            flow: 1e-5,
            grid_reactive: 1.0,
        }
    }
}

/// One equality of the OPF, in solver order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualityRow {
    Active { bus: usize },
    Reactive { bus: usize },
    /// `|V|² = 1` at the output bus of a grid-forming converter.
    GridForming { converter: usize, bus: usize },
}

/// One inequality of the OPF (`value <= 0`), in solver order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityRow {
    VoltageMax { bus: usize },
    VoltageMin { bus: usize },
    /// Squared series current against the squared rating.
    LineCurrent { line: usize },
    /// Apparent power at the `from` end against the rating.
    TransformerFrom { transformer: usize },
    TransformerTo { transformer: usize },
    /// Total throughput against the rating, measured at the input side.
    ConverterRating { converter: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Limit {
    /// Squared current rating, pu.
    Current(f64),
    /// Squared apparent power rating, pu.
    Apparent(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Branch {
    pub from: usize,
    pub to: usize,
    pub adm: BranchAdmittance,
    limit: Limit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Input,
    Output,
}

/// Direction and magnitude of a converter's power transfer, per-unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverterFlow {
    pub forward: f64,
    pub reverse: f64,
    /// Bus the dominant flow enters the converter at.
    pub input_bus: usize,
    pub output_bus: usize,
    /// Dominant flow measured at its input.
    pub input: f64,
    /// Dominant flow delivered at its output.
    pub output: f64,
    /// `(1 − η)(F_fwd + F_rev)`.
    pub loss: f64,
}

/// A polynomial OPF over a normalized network.
///
/// Immutable after assembly; evaluation is pure.
#[derive(Debug, Clone)]
pub struct OpfProblem {
    network: NetworkModel,
    objective: ObjectiveKind,
    regularization: Regularization,
    layout: StateLayout,
    lower: Vec<f64>,
    upper: Vec<f64>,
    initial: Vec<f64>,
    pub(crate) branches: Vec<Branch>,
    /// Number of lines; branches past it are transformers.
    n_lines: usize,
    bus_branches: Vec<Vec<usize>>,
    bus_converters: Vec<Vec<(usize, Side)>>,
    bus_generators: Vec<Vec<usize>>,
    bus_grids: Vec<Vec<usize>>,
    p_load: Vec<f64>,
    q_load: Vec<f64>,
    operating_cost: Vec<f64>,
    equalities: Vec<EqualityRow>,
    inequalities: Vec<InequalityRow>,
    eq_support: Vec<Vec<usize>>,
    ineq_support: Vec<Vec<usize>>,
    objective_support: Vec<usize>,
    angle_reference: Vec<usize>,
    grid_bound: f64,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl OpfProblem {
    /// Builds the OPF of a physical-unit `network` operated per `scenario`.
    ///
    /// The scenario's storage loads and grid modes are applied, the result is
    /// normalized on the network's power base, and the external grid's
    /// unbounded side is capped at ten times the installed capacity.
    pub fn assemble(network: &NetworkModel, scenario: &OpfScenario) -> Result<Self> {
        if network.is_per_unit() {
            return Err(Error::Scenario("assemble expects a physical-unit network".into()));
        }
        let capacity = network.installed_capacity();
        let grid_bound = if capacity > 0.0 {
            10.0 * capacity / network.s_base()
        } else {
            1.0
        };
        let applied = apply_opf_scenario(network, scenario)?;
        let pu = per_unit_normalize(&applied, applied.s_base())?;
        Ok(Self::build(pu, scenario.objective, grid_bound))
    }

    fn build(network: NetworkModel, objective: ObjectiveKind, grid_bound: f64) -> Self {
        let layout = StateLayout::new(&network);
        let n_bus = network.buses().len();

        let mut branches = Vec::new();
        for (index, line) in network.lines().iter().enumerate() {
            let i_max = line.i_max;
            branches.push(Branch {
                from: line.from,
                to: line.to,
                adm: *network.line_admittance(index).expect("line admittance"),
                limit: Limit::Current(i_max * i_max),
            });
        }
        let n_lines = branches.len();
        for (index, t) in network.transformers().iter().enumerate() {
            branches.push(Branch {
                from: t.from,
                to: t.to,
                adm: *network.transformer_admittance(index).expect("transformer admittance"),
                limit: Limit::Apparent(t.s_n * t.s_n),
            });
        }

        let mut bus_branches = vec![Vec::new(); n_bus];
        for (index, b) in branches.iter().enumerate() {
            bus_branches[b.from].push(index);
            bus_branches[b.to].push(index);
        }
        let mut bus_converters = vec![Vec::new(); n_bus];
        for (index, c) in network.converters().iter().enumerate() {
            bus_converters[c.from].push((index, Side::Input));
            bus_converters[c.to].push((index, Side::Output));
        }
        let mut bus_generators = vec![Vec::new(); n_bus];
        for (index, g) in network.generators().iter().enumerate() {
            bus_generators[g.bus].push(index);
        }
        let mut bus_grids = vec![Vec::new(); n_bus];
        for (index, g) in network.external_grids().iter().enumerate() {
            bus_grids[g.bus].push(index);
        }
        let mut p_load = vec![0.0; n_bus];
        let mut q_load = vec![0.0; n_bus];
        for l in network.loads() {
            p_load[l.bus] += l.p;
            q_load[l.bus] += l.q;
        }
        let operating_cost = network
            .generators()
            .iter()
            .map(|g| g.economics.as_ref().map_or(0.0, |e| e.oc))
            .collect();

        // One angle reference per AC island of lines and transformers.
        let mut parent: Vec<usize> = (0..n_bus).collect();
        for b in &branches {
            let (ra, rb) = (find(&mut parent, b.from), find(&mut parent, b.to));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut angle_reference = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for bus in network.buses().iter().filter(|b| b.kind == CurrentKind::Ac) {
            let root = find(&mut parent, bus.id);
            if seen.insert(root) {
                let grid_bus = network
                    .external_grids()
                    .iter()
                    .map(|g| g.bus)
                    .filter(|&g| find(&mut parent, g) == root)
                    .min();
                angle_reference.push(grid_bus.unwrap_or(bus.id));
            }
        }

        let n = layout.len();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut initial = vec![0.0; n];
        for bus in network.buses() {
            let e = layout.bus_e[bus.id];
            lower[e] = 0.0;
            upper[e] = bus.v_max_pu;
            initial[e] = 1.0;
            if let Some(f) = layout.bus_f[bus.id] {
                let fixed = angle_reference.contains(&bus.id);
                lower[f] = if fixed { 0.0 } else { -bus.v_max_pu };
                upper[f] = if fixed { 0.0 } else { bus.v_max_pu };
            }
        }
        for (index, g) in network.generators().iter().enumerate() {
            let p = layout.generator_p[index];
            lower[p] = g.p_min;
            upper[p] = g.p_nom;
            initial[p] = 0.5 * (g.p_min + g.p_nom);
            if let Some(q) = layout.generator_q[index] {
                lower[q] = g.q_min;
                upper[q] = g.q_nom;
                initial[q] = 0.5 * (g.q_min + g.q_nom);
            }
        }
        for (index, g) in network.external_grids().iter().enumerate() {
            let (lo, hi) = match g.mode {
                GridMode::ConsumeOnly => (-grid_bound, 0.0),
                GridMode::SupplyOnly => (0.0, grid_bound),
                GridMode::Either => (-grid_bound, grid_bound),
            };
            let p = layout.grid_p[index];
            lower[p] = lo;
            upper[p] = hi;
            let q = layout.grid_q[index];
            lower[q] = -grid_bound;
            upper[q] = grid_bound;
        }
        for (index, c) in network.converters().iter().enumerate() {
            for var in [layout.forward[index], layout.reverse[index]] {
                lower[var] = 0.0;
                upper[var] = c.s_n;
            }
        }

        let mut equalities = Vec::new();
        for bus in network.buses() {
            equalities.push(EqualityRow::Active { bus: bus.id });
        }
        for bus in network.buses().iter().filter(|b| b.kind == CurrentKind::Ac) {
            equalities.push(EqualityRow::Reactive { bus: bus.id });
        }
        for (index, c) in network.converters().iter().enumerate() {
            if c.control == ControlMode::GridForming {
                equalities.push(EqualityRow::GridForming {
                    converter: index,
                    bus: c.to,
                });
            }
        }
        let mut inequalities = Vec::new();
        for bus in network.buses() {
            inequalities.push(InequalityRow::VoltageMax { bus: bus.id });
            inequalities.push(InequalityRow::VoltageMin { bus: bus.id });
        }
        for line in 0..network.lines().len() {
            inequalities.push(InequalityRow::LineCurrent { line });
        }
        for transformer in 0..network.transformers().len() {
            inequalities.push(InequalityRow::TransformerFrom { transformer });
            inequalities.push(InequalityRow::TransformerTo { transformer });
        }
        for converter in 0..network.converters().len() {
            inequalities.push(InequalityRow::ConverterRating { converter });
        }

        let mut problem = OpfProblem {
            network,
            objective,
            regularization: Regularization::default(),
            layout,
            lower,
            upper,
            initial,
            branches,
            n_lines,
            bus_branches,
            bus_converters,
            bus_generators,
            bus_grids,
            p_load,
            q_load,
            operating_cost,
            equalities,
            inequalities,
            eq_support: Vec::new(),
            ineq_support: Vec::new(),
            objective_support: Vec::new(),
            angle_reference,
            grid_bound,
        };
        problem.eq_support = problem
            .equalities
            .iter()
            .map(|row| problem.equality_vars(*row))
            .collect();
        problem.ineq_support = problem
            .inequalities
            .iter()
            .map(|row| problem.inequality_vars(*row))
            .collect();
        problem.objective_support = problem.objective_vars();
        problem
    }

    /// Same constraints, different objective.
    pub fn with_objective(mut self, objective: ObjectiveKind) -> Self {
        self.objective = objective;
        self.objective_support = self.objective_vars();
        self
    }

    pub fn with_regularization(mut self, regularization: Regularization) -> Self {
        self.regularization = regularization;
        self.objective_support = self.objective_vars();
        self
    }

    /// The normalized network the problem was built on (scenario applied).
    pub fn network(&self) -> &NetworkModel {
        &self.network
    }

    pub fn objective(&self) -> ObjectiveKind {
        self.objective
    }

    pub fn regularization(&self) -> Regularization {
        self.regularization
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    pub fn equality_rows(&self) -> &[EqualityRow] {
        &self.equalities
    }

    pub fn inequality_rows(&self) -> &[InequalityRow] {
        &self.inequalities
    }

    /// Power base, kVA.
    pub fn s_base(&self) -> f64 {
        self.network.per_unit().expect("normalized network").s_base
    }

    /// AC buses whose imaginary voltage is fixed at zero.
    pub fn angle_reference(&self) -> &[usize] {
        &self.angle_reference
    }

    /// Bound on the external grid's power, pu.
    pub fn grid_bound(&self) -> f64 {
        self.grid_bound
    }

    pub fn active_balance_count(&self) -> usize {
        self.count_eq(|r| matches!(r, EqualityRow::Active { .. }))
    }

    pub fn reactive_balance_count(&self) -> usize {
        self.count_eq(|r| matches!(r, EqualityRow::Reactive { .. }))
    }

    pub fn grid_forming_count(&self) -> usize {
        self.count_eq(|r| matches!(r, EqualityRow::GridForming { .. }))
    }

    /// Converters couple their endpoint balances by construction, one
    /// coupling each.
    pub fn converter_coupling_count(&self) -> usize {
        self.network.converters().len()
    }

    fn count_eq(&self, pred: impl Fn(&EqualityRow) -> bool) -> usize {
        self.equalities.iter().filter(|r| pred(r)).count()
    }

    fn voltage<S: Scalar>(&self, x: &[S], bus: usize) -> (S, S) {
        let e = x[self.layout.bus_e[bus]];
        let f = match self.layout.bus_f[bus] {
            Some(i) => x[i],
            None => S::zero(),
        };
        (e, f)
    }

    fn voltage_sq<S: Scalar>(&self, x: &[S], bus: usize) -> S {
        let (e, f) = self.voltage(x, bus);
        e * e + f * f
    }

    /// Active and reactive power leaving `at` into branch `index`, shunt
    /// included.
    pub(crate) fn branch_power<S: Scalar>(&self, x: &[S], index: usize, at: usize) -> (S, S) {
        let b = &self.branches[index];
        let other = if at == b.from { b.to } else { b.from };
        let (ei, fi) = self.voltage(x, at);
        let (ek, fk) = self.voltage(x, other);
        let BranchAdmittance { c, s, b_shunt } = b.adm;
        let vi2 = ei * ei + fi * fi;
        let cross = ei * fk - ek * fi;
        let dot = ei * ek + fi * fk;
        let p = (vi2 - dot) * c + cross * s;
        let q = cross * c + (dot - vi2) * s - vi2 * (0.5 * b_shunt);
        (p, q)
    }

    /// Squared series current of branch `index`, pu.
    pub(crate) fn branch_current_sq<S: Scalar>(&self, x: &[S], index: usize) -> S {
        let b = &self.branches[index];
        let (ei, fi) = self.voltage(x, b.from);
        let (ek, fk) = self.voltage(x, b.to);
        let de = ei - ek;
        let df = fi - fk;
        let re = de * b.adm.c - df * b.adm.s;
        let im = df * b.adm.c + de * b.adm.s;
        re * re + im * im
    }

    fn converter_withdrawal<S: Scalar>(&self, x: &[S], bus: usize) -> S {
        let mut total = S::zero();
        for &(index, side) in &self.bus_converters[bus] {
            let eta = self.network.converters()[index].efficiency;
            let fwd = x[self.layout.forward[index]];
            let rev = x[self.layout.reverse[index]];
            total += match side {
                Side::Input => fwd - rev * eta,
                Side::Output => rev - fwd * eta,
            };
        }
        total
    }

    /// Active power mismatch at `bus`: branch outflow plus converter
    /// withdrawal minus net injection (generation less load), pu.
    pub fn residual_active<S: Scalar>(&self, bus: usize, x: &[S]) -> S {
        let mut r = self.converter_withdrawal(x, bus);
        for &b in &self.bus_branches[bus] {
            r += self.branch_power(x, b, bus).0;
        }
        for &g in &self.bus_generators[bus] {
            r = r - x[self.layout.generator_p[g]];
        }
        for &g in &self.bus_grids[bus] {
            r = r - x[self.layout.grid_p[g]];
        }
        r + self.p_load[bus]
    }

    /// Reactive power mismatch at an AC `bus`; `None` on DC buses.
    pub fn residual_reactive<S: Scalar>(&self, bus: usize, x: &[S]) -> Option<S> {
        self.layout.bus_f[bus]?;
        let mut r = S::zero();
        for &b in &self.bus_branches[bus] {
            r += self.branch_power(x, b, bus).1;
        }
        for &g in &self.bus_generators[bus] {
            if let Some(q) = self.layout.generator_q[g] {
                r = r - x[q];
            }
        }
        for &g in &self.bus_grids[bus] {
            r = r - x[self.layout.grid_q[g]];
        }
        Some(r + self.q_load[bus])
    }

    /// Flows of converter `index` at state `x`.
    pub fn converter_flow(&self, index: usize, x: &[f64]) -> ConverterFlow {
        let c = &self.network.converters()[index];
        let forward = x[self.layout.forward[index]];
        let reverse = x[self.layout.reverse[index]];
        let (input_bus, output_bus, input) = if forward >= reverse {
            (c.from, c.to, forward)
        } else {
            (c.to, c.from, reverse)
        };
        ConverterFlow {
            forward,
            reverse,
            input_bus,
            output_bus,
            input,
            output: c.efficiency * input,
            loss: (1.0 - c.efficiency) * (forward + reverse),
        }
    }

    /// `input − output / η` for the dominant direction of converter
    /// `index`. The two-flow formulation makes this zero by construction; it
    /// is reported as a consistency check.
    pub fn converter_coupling_residual(&self, index: usize, x: &[f64]) -> f64 {
        let flow = self.converter_flow(index, x);
        flow.input - flow.output / self.network.converters()[index].efficiency
    }

    pub fn equality_value<S: Scalar>(&self, row: EqualityRow, x: &[S]) -> S {
        match row {
            EqualityRow::Active { bus } => self.residual_active(bus, x),
            EqualityRow::Reactive { bus } => self.residual_reactive(bus, x).unwrap_or_else(S::zero),
            EqualityRow::GridForming { bus, .. } => self.voltage_sq(x, bus) - 1.0,
        }
    }

    pub fn inequality_value<S: Scalar>(&self, row: InequalityRow, x: &[S]) -> S {
        let bus_limits = |bus: usize| {
            let b = &self.network.buses()[bus];
            (b.v_min_pu, b.v_max_pu)
        };
        match row {
            InequalityRow::VoltageMax { bus } => {
                let (_, hi) = bus_limits(bus);
                self.voltage_sq(x, bus) * (1.0 / (hi * hi)) - 1.0
            }
            InequalityRow::VoltageMin { bus } => {
                let (lo, _) = bus_limits(bus);
                -self.voltage_sq(x, bus) * (1.0 / (lo * lo)) + 1.0
            }
            InequalityRow::LineCurrent { line } => {
                let Limit::Current(max2) = self.branches[line].limit else {
                    unreachable!("line branch carries a current limit")
                };
                self.branch_current_sq(x, line) * (1.0 / max2) - 1.0
            }
            InequalityRow::TransformerFrom { transformer } | InequalityRow::TransformerTo { transformer } => {
                let index = self.n_lines + transformer;
                let b = &self.branches[index];
                let Limit::Apparent(max2) = b.limit else {
                    unreachable!("transformer branch carries an apparent-power limit")
                };
                let bus = if matches!(row, InequalityRow::TransformerFrom { .. }) {
                    b.from
                } else {
                    b.to
                };
                self.branch_current_sq(x, index) * self.voltage_sq(x, bus) * (1.0 / max2) - 1.0
            }
            InequalityRow::ConverterRating { converter } => {
                let s_n = self.network.converters()[converter].s_n;
                (x[self.layout.forward[converter]] + x[self.layout.reverse[converter]]) * (1.0 / s_n) - 1.0
            }
        }
    }

    /// Every inequality at `x`, in row order; feasible entries are `<= 0`.
    pub fn inequality_set(&self, x: &[f64]) -> Vec<f64> {
        self.inequalities
            .iter()
            .map(|&row| self.inequality_value(row, x))
            .collect()
    }

    /// Every equality residual at `x`, in row order.
    pub fn equality_set(&self, x: &[f64]) -> Vec<f64> {
        self.equalities
            .iter()
            .map(|&row| self.equality_value(row, x))
            .collect()
    }

    fn bare_objective<S: Scalar>(&self, kind: ObjectiveKind, x: &[S]) -> S {
        let generation = || {
            self.layout
                .generator_p
                .iter()
                .map(|&p| x[p])
                .sum::<S>()
        };
        match kind {
            ObjectiveKind::H1 => generation(),
            ObjectiveKind::H4 => -generation(),
            ObjectiveKind::H2 => (0..self.network.buses().len())
                .map(|bus| (self.voltage_sq(x, bus) - 1.0).square())
                .sum(),
            ObjectiveKind::H3 => {
                let s_base = self.s_base();
                self.layout
                    .generator_p
                    .iter()
                    .zip(&self.operating_cost)
                    .map(|(&p, &oc)| x[p] * (oc * s_base))
                    .sum()
            }
        }
    }

    /// Objective `kind` at `x` in engineering units: kW for H1/H4 (the
    /// external grid is not counted as generation), pu² for H2, currency per
    /// hour for H3.
    pub fn objective_value(&self, kind: ObjectiveKind, x: &[f64]) -> f64 {
        let value = self.bare_objective(kind, x);
        match kind {
            ObjectiveKind::H1 | ObjectiveKind::H4 => value * self.s_base(),
            ObjectiveKind::H2 | ObjectiveKind::H3 => value,
        }
    }

    fn push_voltage_vars(&self, bus: usize, out: &mut Vec<usize>) {
        out.push(self.layout.bus_e[bus]);
        if let Some(f) = self.layout.bus_f[bus] {
            out.push(f);
        }
    }

    fn equality_vars(&self, row: EqualityRow) -> Vec<usize> {
        let mut out = Vec::new();
        match row {
            EqualityRow::Active { bus } | EqualityRow::Reactive { bus } => {
                let active = matches!(row, EqualityRow::Active { .. });
                self.push_voltage_vars(bus, &mut out);
                for &b in &self.bus_branches[bus] {
                    let br = &self.branches[b];
                    self.push_voltage_vars(if br.from == bus { br.to } else { br.from }, &mut out);
                }
                for &g in &self.bus_generators[bus] {
                    if active {
                        out.push(self.layout.generator_p[g]);
                    } else if let Some(q) = self.layout.generator_q[g] {
                        out.push(q);
                    }
                }
                for &g in &self.bus_grids[bus] {
                    out.push(if active { self.layout.grid_p[g] } else { self.layout.grid_q[g] });
                }
                if active {
                    for &(c, _) in &self.bus_converters[bus] {
                        out.push(self.layout.forward[c]);
                        out.push(self.layout.reverse[c]);
                    }
                }
            }
            EqualityRow::GridForming { bus, .. } => self.push_voltage_vars(bus, &mut out),
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn inequality_vars(&self, row: InequalityRow) -> Vec<usize> {
        let mut out = Vec::new();
        match row {
            InequalityRow::VoltageMax { bus } | InequalityRow::VoltageMin { bus } => {
                self.push_voltage_vars(bus, &mut out)
            }
            InequalityRow::LineCurrent { line } => {
                let b = &self.branches[line];
                self.push_voltage_vars(b.from, &mut out);
                self.push_voltage_vars(b.to, &mut out);
            }
            InequalityRow::TransformerFrom { transformer } | InequalityRow::TransformerTo { transformer } => {
                let b = &self.branches[self.n_lines + transformer];
                self.push_voltage_vars(b.from, &mut out);
                self.push_voltage_vars(b.to, &mut out);
            }
            InequalityRow::ConverterRating { converter } => {
                out.push(self.layout.forward[converter]);
                out.push(self.layout.reverse[converter]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn objective_vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        match self.objective {
            ObjectiveKind::H1 | ObjectiveKind::H3 | ObjectiveKind::H4 => {
                out.extend(&self.layout.generator_p)
            }
            ObjectiveKind::H2 => {
                for bus in 0..self.network.buses().len() {
                    self.push_voltage_vars(bus, &mut out);
                }
            }
        }
        if self.regularization.flow != 0.0 {
            out.extend(&self.layout.forward);
            out.extend(&self.layout.reverse);
        }
        if self.regularization.grid_reactive != 0.0 {
            out.extend(&self.layout.grid_q);
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl NlpProblem for OpfProblem {
    fn num_vars(&self) -> usize {
        self.layout.len()
    }

    fn num_eq(&self) -> usize {
        self.equalities.len()
    }

    fn num_ineq(&self) -> usize {
        self.inequalities.len()
    }

    fn lower_bounds(&self) -> Vec<f64> {
        self.lower.clone()
    }

    fn upper_bounds(&self) -> Vec<f64> {
        self.upper.clone()
    }

    fn initial_point(&self) -> Vec<f64> {
        self.initial.clone()
    }

    fn objective<S: Scalar>(&self, x: &[S]) -> S {
        let mut value = self.bare_objective(self.objective, x);
        let reg = self.regularization;
        if reg.flow != 0.0 {
            let flows: S = self
                .layout
                .forward
                .iter()
                .chain(&self.layout.reverse)
                .map(|&i| x[i])
                .sum();
            value += flows * reg.flow;
        }
        if reg.grid_reactive != 0.0 {
            let q: S = self.layout.grid_q.iter().map(|&i| x[i].square()).sum();
            value += q * reg.grid_reactive;
        }
        value
    }

    fn equality<S: Scalar>(&self, j: usize, x: &[S]) -> S {
        self.equality_value(self.equalities[j], x)
    }

    fn inequality<S: Scalar>(&self, j: usize, x: &[S]) -> S {
        self.inequality_value(self.inequalities[j], x)
    }

    fn objective_support(&self) -> Vec<usize> {
        self.objective_support.clone()
    }

    fn equality_support(&self, j: usize) -> Vec<usize> {
        self.eq_support[j].clone()
    }

    fn inequality_support(&self, j: usize) -> Vec<usize> {
        self.ineq_support[j].clone()
    }
}
