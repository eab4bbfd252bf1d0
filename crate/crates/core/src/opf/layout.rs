use std::fmt;

use crate::grid_model::{CurrentKind, NetworkModel};

/// What one entry of the state vector holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    /// Real voltage part of a bus (the whole voltage on DC buses).
    E(usize),
    /// Imaginary voltage part of an AC bus.
    F(usize),
    GeneratorP(usize),
    GeneratorQ(usize),
    GridP(usize),
    GridQ(usize),
    /// Converter flow from its first to its second endpoint, measured at the
    /// first.
    Forward(usize),
    /// Converter flow from its second to its first endpoint, measured at the
    /// second.
    Reverse(usize),
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::E(b) => write!(f, "e[bus {b}]"),
            Variable::F(b) => write!(f, "f[bus {b}]"),
            Variable::GeneratorP(g) => write!(f, "P[generator {g}]"),
            Variable::GeneratorQ(g) => write!(f, "Q[generator {g}]"),
            Variable::GridP(g) => write!(f, "P[external grid {g}]"),
            Variable::GridQ(g) => write!(f, "Q[external grid {g}]"),
            Variable::Forward(c) => write!(f, "F_fwd[converter {c}]"),
            Variable::Reverse(c) => write!(f, "F_rev[converter {c}]"),
        }
    }
}

/// Index map of the OPF state vector.
///
/// Entries are laid out as: per bus in id order `e` then (AC only) `f`; per
/// generator `P` then (AC bus only) `Q`; per external grid `P`, `Q`; per
/// converter the forward then the reverse flow. Indices in the vectors below
/// follow record order, not ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateLayout {
    pub bus_e: Vec<usize>,
    pub bus_f: Vec<Option<usize>>,
    pub generator_p: Vec<usize>,
    pub generator_q: Vec<Option<usize>>,
    pub grid_p: Vec<usize>,
    pub grid_q: Vec<usize>,
    pub forward: Vec<usize>,
    pub reverse: Vec<usize>,
    variables: Vec<Variable>,
}

impl StateLayout {
    pub fn new(network: &NetworkModel) -> Self {
        let mut variables = Vec::new();
        let mut push = |v: Variable| {
            variables.push(v);
            variables.len() - 1
        };
        let mut bus_e = Vec::new();
        let mut bus_f = Vec::new();
        for bus in network.buses() {
            bus_e.push(push(Variable::E(bus.id)));
            bus_f.push((bus.kind == CurrentKind::Ac).then(|| push(Variable::F(bus.id))));
        }
        let mut generator_p = Vec::new();
        let mut generator_q = Vec::new();
        for (index, g) in network.generators().iter().enumerate() {
            generator_p.push(push(Variable::GeneratorP(index)));
            let ac = network.buses()[g.bus].kind == CurrentKind::Ac;
            generator_q.push(ac.then(|| push(Variable::GeneratorQ(index))));
        }
        let mut grid_p = Vec::new();
        let mut grid_q = Vec::new();
        for index in 0..network.external_grids().len() {
            grid_p.push(push(Variable::GridP(index)));
            grid_q.push(push(Variable::GridQ(index)));
        }
        let mut forward = Vec::new();
        let mut reverse = Vec::new();
        for index in 0..network.converters().len() {
            forward.push(push(Variable::Forward(index)));
            reverse.push(push(Variable::Reverse(index)));
        }
        StateLayout {
            bus_e,
            bus_f,
            generator_p,
            generator_q,
            grid_p,
            grid_q,
            forward,
            reverse,
            variables,
        }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variable(&self, index: usize) -> Variable {
        self.variables[index]
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }
}
