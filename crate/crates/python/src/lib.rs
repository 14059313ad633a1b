use pyo3::exceptions::{PyIndexError, PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use rmd_core::container::{Codec, Container, Payload};
use rmd_core::corpus::{CorpusModel, Scheme};
use rmd_core::{codeword_counts, decode_codeword_reference, encode_integer, BitString, Error, IndexParams};

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::OutOfBounds { .. } => PyIndexError::new_err(msg),
        Error::Capacity(_) => PyOverflowError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn rmd_codec(name: &str) -> PyResult<Codec> {
    let codec: Codec = name.parse().map_err(to_py)?;
    if codec == Codec::Elias {
        return Err(PyValueError::new_err("use EliasArray for the elias codec"));
    }
    Ok(codec)
}

fn resolve_index(len: u64, t: i64) -> PyResult<u64> {
    let t = if t < 0 { t + len as i64 } else { t };
    if t < 0 || t as u64 >= len {
        return Err(PyIndexError::new_err(format!("index out of range for length {len}")));
    }
    Ok(t as u64)
}

/// An RMD-coded integer array with random access.
#[pyclass(module = "rmd_access", frozen)]
struct RmdArray {
    inner: Container,
}

impl RmdArray {
    fn array(&self) -> &rmd_core::RmdArray {
        match self.inner.payload() {
            Payload::Rmd(a) => a,
            Payload::Elias(_) => unreachable!("RmdArray always holds an RMD payload"),
        }
    }
}

#[pymethods]
impl RmdArray {
    #[new]
    #[pyo3(signature = (values, codec = "rmd24inf", l1 = 16, l2 = 8, chunk_size = 7))]
    fn new(values: Vec<u64>, codec: &str, l1: u32, l2: u32, chunk_size: u32) -> PyResult<Self> {
        let codec = rmd_codec(codec)?;
        let params = IndexParams::new(l1, l2, chunk_size).map_err(to_py)?;
        let inner = Container::build(codec, &values, params, 0).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Loads a container produced by `to_bytes` or the command-line tool.
    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        let inner = Container::from_bytes(data).map_err(to_py)?;
        if inner.codec() == Codec::Elias {
            return Err(PyValueError::new_err("container holds an Elias stream"));
        }
        Ok(Self { inner })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_bytes())
    }

    fn __len__(&self) -> usize {
        self.inner.len() as usize
    }

    fn __getitem__(&self, t: i64) -> PyResult<u64> {
        let t = resolve_index(self.inner.len(), t)?;
        self.inner.get(t).map_err(to_py)
    }

    fn get(&self, t: u64) -> PyResult<u64> {
        self.inner.get(t).map_err(to_py)
    }

    /// Byte and in-byte start index of element `t`.
    fn locate(&self, t: u64) -> PyResult<(usize, usize)> {
        self.array().locate_traced(t, &mut ()).map_err(to_py)
    }

    fn to_list(&self) -> PyResult<Vec<u64>> {
        self.array().decode_all().map_err(to_py)
    }

    #[getter]
    fn codec(&self) -> String {
        self.inner.codec().to_string()
    }

    #[getter]
    fn payload_bits(&self) -> u64 {
        self.array().stream().payload_bits()
    }

    /// Byte counts of the index components and lookup tables.
    fn overhead<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let ov = self.array().overhead();
        let d = PyDict::new(py);
        d.set_item("payload_bytes", ov.payload_bytes)?;
        d.set_item("level1_bytes", ov.level1_bytes)?;
        d.set_item("delta_b_bytes", ov.delta_b_bytes)?;
        d.set_item("delta_c_bytes", ov.delta_c_bytes)?;
        d.set_item("table_bytes", ov.table_bytes)?;
        d.set_item("total_bytes", ov.total_bytes())?;
        d.set_item("ratio", ov.ratio())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let p = self.array().index().params();
        format!("RmdArray(len={}, codec={}, l1={}, l2={})", self.inner.len(), self.inner.codec(), p.l1(), p.l2())
    }
}

/// Elias δ coded array with sampled offsets.
#[pyclass(module = "rmd_access", frozen)]
struct EliasArray {
    inner: rmd_core::EliasStream,
}

#[pymethods]
impl EliasArray {
    #[new]
    #[pyo3(signature = (values, sample_interval = 512))]
    fn new(values: Vec<u64>, sample_interval: u32) -> PyResult<Self> {
        let inner = rmd_core::elias_encode(&values, sample_interval).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len() as usize
    }

    fn __getitem__(&self, t: i64) -> PyResult<u64> {
        let t = resolve_index(self.inner.len(), t)?;
        self.inner.get(t).map_err(to_py)
    }

    fn get(&self, t: u64) -> PyResult<u64> {
        self.inner.get(t).map_err(to_py)
    }

    fn to_list(&self) -> PyResult<Vec<u64>> {
        rmd_core::elias_decode(&self.inner).map_err(to_py)
    }

    #[getter]
    fn payload_bits(&self) -> u64 {
        self.inner.payload_bits()
    }
}

/// Codeword of `value` as a string of 0s and 1s.
#[pyfunction]
#[pyo3(signature = (value, codec = "rmd24inf"))]
fn encode(value: u64, codec: &str) -> PyResult<String> {
    let spec = rmd_codec(codec)?.spec().expect("rmd codec");
    let counts = codeword_counts(&spec).map_err(to_py)?;
    Ok(encode_integer(&spec, &counts, value).map_err(to_py)?.to_string())
}

/// Integer encoded by the codeword `bits`.
#[pyfunction]
#[pyo3(signature = (bits, codec = "rmd24inf"))]
fn decode(bits: &str, codec: &str) -> PyResult<u64> {
    let spec = rmd_codec(codec)?.spec().expect("rmd codec");
    let counts = codeword_counts(&spec).map_err(to_py)?;
    let w: BitString = bits.parse().map_err(to_py)?;
    decode_codeword_reference(&spec, &counts, &w).map_err(to_py)
}

/// Tokenizes text and ranks tokens by frequency: `(dictionary, ranks, h0_bits)`.
#[pyfunction]
#[pyo3(signature = (text, scheme = "word"))]
fn rank_text<'py>(py: Python<'py>, text: &[u8], scheme: &str) -> PyResult<(Vec<Bound<'py, PyBytes>>, Vec<u64>, f64)> {
    let scheme: Scheme = scheme.parse().map_err(to_py)?;
    let model = CorpusModel::from_text(text, scheme);
    let h0 = if model.sequence.is_empty() { 0.0 } else { model.h0_bits().map_err(to_py)? };
    let dict = model.dictionary.iter().map(|t| PyBytes::new(py, t)).collect();
    Ok((dict, model.sequence, h0))
}

#[pymodule]
mod rmd_access {
    #[pymodule_export]
    use super::{decode, encode, rank_text, EliasArray, RmdArray};
}
