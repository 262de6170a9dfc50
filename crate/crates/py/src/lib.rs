//! Python bindings for `divgraph`.

use pyo3::exceptions::{PyOverflowError, PyValueError};
use pyo3::prelude::*;

use divgraph::chain::{self as ch, Relation};
use divgraph::construct::{self as cons, ChainPacking};
use divgraph::oracle::{self, OracleLimits, Quantity};
use divgraph::sets;
use divgraph::Sieve;

fn err(e: divgraph::Error) -> PyErr {
    match e {
        divgraph::Error::Overflow(_) => PyOverflowError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn sieve(x: u64) -> PyResult<Sieve> {
    Sieve::for_bound(x.max(2)).map_err(err)
}

fn relation(name: &str, bound: Option<u64>) -> PyResult<Relation> {
    match (name, bound) {
        ("divisor", _) => Ok(Relation::Divisor),
        ("lcm", Some(bound)) => Ok(Relation::LcmBounded { bound }),
        ("lcm", None) => Err(PyValueError::new_err("the lcm relation needs a bound")),
        _ => Err(PyValueError::new_err(format!("unknown relation {name:?}"))),
    }
}

#[pyclass(name = "Chain", module = "pydivgraph", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyChain(ch::Chain);

#[pymethods]
impl PyChain {
    #[new]
    #[pyo3(signature = (elements, relation = "divisor", bound = None))]
    fn new(elements: Vec<u64>, relation: &str, bound: Option<u64>) -> PyResult<Self> {
        Ok(PyChain(ch::Chain::new(elements, self::relation(relation, bound)?)))
    }

    #[getter]
    fn elements(&self) -> Vec<u64> {
        self.0.elements().to_vec()
    }

    #[getter]
    fn relation(&self) -> String {
        self.0.relation().to_string()
    }

    /// `None` for a valid chain, otherwise the violation message.
    fn violation(&self) -> Option<String> {
        self.0.validate().err().map(|v| v.to_string())
    }

    fn is_valid(&self) -> bool {
        self.0.validate().is_ok()
    }

    fn scaled(&self, k: u64) -> PyResult<Self> {
        self.0.scaled(k).map(PyChain).map_err(err)
    }

    /// `(start, end, label)` for each maximal run outside `A(x)`.
    fn components(&self, x: u64) -> PyResult<Vec<(usize, usize, u64)>> {
        let d = ch::decompose_components(&sieve(x)?, &self.0, x).map_err(err)?;
        Ok(d.components.iter().map(|c| (c.start, c.end, c.label)).collect())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_line()
    }

    fn __repr__(&self) -> String {
        format!("Chain([{}])", self.0.to_line().replace(' ', ", "))
    }
}

#[pyclass(name = "Packing", module = "pydivgraph", frozen)]
struct PyPacking(ChainPacking);

#[pymethods]
impl PyPacking {
    #[getter]
    fn x(&self) -> u64 {
        self.0.x
    }

    #[getter]
    fn z(&self) -> usize {
        self.0.z
    }

    #[getter]
    fn covered(&self) -> u64 {
        self.0.covered
    }

    #[getter]
    fn chains(&self) -> Vec<PyChain> {
        self.0.chains.iter().cloned().map(PyChain).collect()
    }

    /// `None` when disjoint, equal-length, valid and within `[1, x]`.
    fn audit(&self) -> Option<String> {
        self.0.audit().err()
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn __len__(&self) -> usize {
        self.0.chains.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Packing(x={}, z={}, chains={}, covered={})",
            self.0.x,
            self.0.z,
            self.0.chains.len(),
            self.0.covered
        )
    }
}

#[pyclass(name = "OracleResult", module = "pydivgraph", frozen)]
struct PyOracleResult(oracle::OracleResult);

#[pymethods]
impl PyOracleResult {
    #[getter]
    fn quantity(&self) -> &'static str {
        self.0.quantity.symbol()
    }

    #[getter]
    fn x(&self) -> u64 {
        self.0.x
    }

    #[getter]
    fn y(&self) -> Option<u64> {
        self.0.y
    }

    #[getter]
    fn z(&self) -> Option<usize> {
        self.0.z
    }

    #[getter]
    fn value(&self) -> u64 {
        self.0.value
    }

    #[getter]
    fn witness(&self) -> Vec<PyChain> {
        self.0.witness.iter().cloned().map(PyChain).collect()
    }

    fn check_witness(&self) -> Option<String> {
        self.0.check_witness().err()
    }

    fn __repr__(&self) -> String {
        format!("OracleResult({}, x={}, value={})", self.0.quantity.symbol(), self.0.x, self.0.value)
    }
}

/// Schinzel–Szekeres function `S(n)`.
#[pyfunction]
fn schinzel_szekeres(n: u64) -> PyResult<u64> {
    sieve(n)?.schinzel_szekeres(n).map_err(err)
}

#[pyfunction]
fn in_a(n: u64, x: u64) -> PyResult<bool> {
    sets::in_a(&sieve(n.max(x))?, n, x).map_err(err)
}

#[pyfunction]
fn in_b(n: u64, x: u64) -> PyResult<bool> {
    sets::in_b(&sieve(n.max(x))?, n, x).map_err(err)
}

#[pyfunction]
fn enumerate_a(x: u64) -> PyResult<Vec<u64>> {
    sets::enumerate_a(&sieve(x)?, x).map_err(err)
}

#[pyfunction]
fn enumerate_b(x: u64) -> PyResult<Vec<u64>> {
    sets::enumerate_b(&sieve(x)?, x).map_err(err)
}

/// `(floor_residual, parity_residual)`; both vanish for `x >= 2`.
#[pyfunction]
fn identity_residuals(x: u64) -> PyResult<(i64, i64)> {
    let s = sets::set_stats(&sieve(x)?, x).map_err(err)?;
    Ok((s.floor_residual(), s.parity_residual()))
}

#[pyfunction]
fn chain_in_a(x: u64) -> PyResult<PyChain> {
    cons::chain_in_a(&sieve(x)?, x).map(PyChain).map_err(err)
}

#[pyfunction]
fn long_chain(x: u64) -> PyResult<PyChain> {
    cons::long_chain(&sieve(x)?, x).map(PyChain).map_err(err)
}

#[pyfunction]
fn pack_chains(x: u64, z: usize) -> PyResult<PyPacking> {
    cons::pack_chains(&sieve(x)?, x, z).map(PyPacking).map_err(err)
}

#[pyfunction]
fn geometric_chains(x: u64, z: usize) -> PyPacking {
    PyPacking(cons::geometric_chains(x, z))
}

/// Exact value of `f`, `g`, `f_a`, `R`, `T`, `F` or `G` on a small instance.
#[pyfunction]
#[pyo3(signature = (quantity, x, param = None, max_path = 30, max_pack = 14))]
fn brute(quantity: &str, x: u64, param: Option<u64>, max_path: u64, max_pack: u64) -> PyResult<PyOracleResult> {
    let q = Quantity::parse(quantity).ok_or_else(|| PyValueError::new_err(format!("unknown quantity {quantity:?}")))?;
    let limits = OracleLimits { max_path, max_pack };
    oracle::brute(&sieve(x)?, q, x, param, &limits)
        .map(PyOracleResult)
        .map_err(err)
}

/// Parses chain-format text into its chains.
#[pyfunction]
fn read_chains(text: &str) -> PyResult<Vec<PyChain>> {
    Ok(ch::read_chains(text).map_err(err)?.chains.into_iter().map(PyChain).collect())
}

#[pymodule]
fn pydivgraph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChain>()?;
    m.add_class::<PyPacking>()?;
    m.add_class::<PyOracleResult>()?;
    m.add_function(wrap_pyfunction!(schinzel_szekeres, m)?)?;
    m.add_function(wrap_pyfunction!(in_a, m)?)?;
    m.add_function(wrap_pyfunction!(in_b, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_a, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_b, m)?)?;
    m.add_function(wrap_pyfunction!(identity_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(chain_in_a, m)?)?;
    m.add_function(wrap_pyfunction!(long_chain, m)?)?;
    m.add_function(wrap_pyfunction!(pack_chains, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_chains, m)?)?;
    m.add_function(wrap_pyfunction!(brute, m)?)?;
    m.add_function(wrap_pyfunction!(read_chains, m)?)?;
    Ok(())
}
