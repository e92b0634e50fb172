use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use permkit_core::classify::{self, Verdict};
use permkit_core::divisibility::{self, CertificateVerdict, SeriesVerdict};
use permkit_core::spectra::{self, SweepVerdict};
use permkit_core::{kernelcheck, matcore, sampleverify, Error};

create_exception!(permkit, PermkitError, PyException);

fn err(e: Error) -> PyErr {
    PermkitError::new_err(e.to_string())
}

fn verdict_name(v: Verdict) -> String {
    format!("{v:?}")
}

/// A square candidate kernel. Rows need not be symmetric.
#[pyclass(name = "Kernel", module = "permkit", frozen)]
struct PyKernel {
    inner: permkit_core::Kernel,
}

#[pymethods]
impl PyKernel {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        permkit_core::Kernel::from_rows(&rows).map(|inner| PyKernel { inner }).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.matrix().to_rows()
    }

    fn det(&self) -> f64 {
        matcore::det(self.inner.matrix())
    }

    fn __repr__(&self) -> String {
        format!("Kernel({:?})", self.rows())
    }

    /// Verdict, failure reason and witnesses.
    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = if self.inner.dim() == 3 { classify::classify3(&self.inner) } else { classify::classify(&self.inner) }
            .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("verdict", verdict_name(r.verdict))?;
        d.set_item("failure", r.failure)?;
        d.set_item("admissible_beta", r.admissible_beta)?;
        d.set_item(
            "class1_target",
            r.class1_witness.as_ref().map(|w| w.target.to_rows()),
        )?;
        d.set_item(
            "class1_scaling",
            r.class1_witness.as_ref().and_then(|w| w.scaling.as_ref().map(|s| s.0.clone())),
        )?;
        d.set_item("class2_mmatrix", r.class2_witness.as_ref().map(|w| w.mmatrix.to_rows()))?;
        d.set_item("class2_scaling", r.class2_witness.as_ref().map(|w| w.scaling.0.clone()))?;
        Ok(d)
    }

    /// Sign and cycle conditions every kernel must satisfy.
    fn check_necessary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = kernelcheck::check_necessary(&self.inner);
        let d = PyDict::new(py);
        d.set_item("overall", r.overall)?;
        d.set_item("det", r.det)?;
        d.set_item("first_failure", r.first_failure())?;
        Ok(d)
    }

    #[pyo3(signature = (r_max = 1e3, steps = 40))]
    fn resolvent_sweep<'py>(&self, py: Python<'py>, r_max: f64, steps: usize) -> PyResult<Bound<'py, PyDict>> {
        let s = spectra::vere_jones_sweep(&self.inner, r_max, steps);
        let d = PyDict::new(py);
        let (name, at) = match s.verdict {
            SweepVerdict::AllNonneg => ("AllNonneg", None),
            SweepVerdict::FailsAt(r) => ("FailsAt", Some(r)),
            SweepVerdict::DetFailsAt(r) => ("DetFailsAt", Some(r)),
        };
        d.set_item("verdict", name)?;
        d.set_item("r", at)?;
        d.set_item("signature", s.signature.map(|g| g.0))?;
        Ok(d)
    }

    /// Coefficients of -log det(I - ZΓ) up to total degree `degree`, keyed by exponent tuples.
    fn log_det_series<'py>(&self, py: Python<'py>, degree: usize) -> PyResult<Bound<'py, PyDict>> {
        let c = divisibility::log_det_series(&self.inner, degree).map_err(err)?;
        let coeffs = PyDict::new(py);
        for (e, v) in &c.coefficients {
            coeffs.set_item(pyo3::types::PyTuple::new(py, e)?, *v)?;
        }
        let d = PyDict::new(py);
        d.set_item("coefficients", coeffs)?;
        d.set_item("min_coefficient", c.min_coefficient)?;
        d.set_item("nonneg", c.is_nonneg())?;
        Ok(d)
    }

    #[pyo3(signature = (degree = 8))]
    fn certify_all_beta<'py>(&self, py: Python<'py>, degree: usize) -> PyResult<Bound<'py, PyDict>> {
        let c = divisibility::certify_all_beta(&self.inner, degree).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("certified", c.is_certified())?;
        let series = match &c {
            CertificateVerdict::CertifiedAllBeta { series, .. } => series,
            CertificateVerdict::NotCertified { reason, series } => {
                d.set_item("reason", reason)?;
                series
            }
        };
        if let Some(s) = series {
            let negative = match &s.verdict {
                SeriesVerdict::Nonneg => None,
                SeriesVerdict::NegativeAt(e) => Some(e.clone()),
            };
            d.set_item("series_negative_at", negative)?;
            d.set_item("indeterminate", s.indeterminate)?;
        }
        Ok(d)
    }

    /// Draws of (½G₁², …) for a class-1 kernel as an `n × dim` list of rows.
    #[pyo3(signature = (beta, n, seed = 0))]
    fn sample(&self, py: Python<'_>, beta: f64, n: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let k = self.inner.clone();
        let b = py
            .detach(move || sampleverify::sample_gaussian_squares(&k, beta, n, seed))
            .map_err(err)?;
        Ok((0..b.count).map(|s| b.sample(s).to_vec()).collect())
    }

    fn laplace(&self, beta: f64, alpha: Vec<f64>) -> PyResult<f64> {
        sampleverify::analytic_laplace(&self.inner, beta, &alpha).map_err(err)
    }

    /// Pseudo-metric matrix and the worst triangle slack.
    fn metric<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = sampleverify::metric_table(&self.inner).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("d", t.d)?;
        d.set_item("worst_slack", t.worst_slack)?;
        d.set_item("worst_triple", t.worst_triple)?;
        Ok(d)
    }
}

/// Whether `rows` is a nonsingular M-matrix.
#[pyfunction]
fn is_mmatrix(rows: Vec<Vec<f64>>) -> PyResult<bool> {
    let m = matcore::Matrix::from_rows(&rows).map_err(err)?;
    Ok(classify::is_mmatrix(&m).is_mmatrix)
}

#[pyfunction]
fn spectral_radius(rows: Vec<Vec<f64>>) -> PyResult<f64> {
    let m = matcore::Matrix::from_rows(&rows).map_err(err)?;
    matcore::spectral_radius(&m).map_err(err)
}

#[pymodule]
fn permkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernel>()?;
    m.add_function(wrap_pyfunction!(is_mmatrix, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_radius, m)?)?;
    m.add("PermkitError", m.py().get_type::<PermkitError>())?;
    Ok(())
}
