//! Python bindings: primitives, key mixing, frame codecs, associations and
//! the link simulator.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use motkip_core::codec::dump::{decode_dump, encode_dump};
use motkip_core::codec::wep::{wep_decap, wep_encap};
use motkip_core::codec::{decapsulate, encapsulate, FlagByte, FrameKind, KeyMaterial, Mpdu, Msdu, Scheme};
use motkip_core::crypto::{crc32_icv, michael as michael_mic, rc4_apply, MichaelKey};
use motkip_core::keymix::{self, MacAddr, P1k, TemporalKey, Tsc48};
use motkip_core::session::{Role, SecurityAssociation};
use motkip_core::sim::{self, ChannelConfig, SessionMetrics, TrafficProfile, SERVER_ADDR, STATION_ADDR};
use motkip_core::Error;

create_exception!(motkip, MotkipError, PyException);
create_exception!(motkip, IntegrityError, MotkipError);
create_exception!(motkip, ReplayError, MotkipError);
create_exception!(motkip, BlackoutError, MotkipError);

fn err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::IcvMismatch | Error::MicFailure | Error::EpochMismatch => IntegrityError::new_err(msg),
        Error::ReplayDetected(_) => ReplayError::new_err(msg),
        Error::Blackout { .. } => BlackoutError::new_err(msg),
        _ => MotkipError::new_err(msg),
    }
}

fn fixed<const N: usize>(what: &str, b: &[u8]) -> PyResult<[u8; N]> {
    b.try_into().map_err(|_| PyValueError::new_err(format!("{what} must be {N} bytes, got {}", b.len())))
}

fn parse_scheme(name: &str) -> PyResult<Scheme> {
    name.parse().map_err(err)
}

#[pyfunction]
fn rc4<'py>(py: Python<'py>, key: &[u8], data: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    Ok(PyBytes::new(py, &rc4_apply(key, data).map_err(err)?))
}

/// CRC-32 ICV as the 4 little-endian octets appended to a frame.
#[pyfunction]
fn crc32<'py>(py: Python<'py>, data: &[u8]) -> Bound<'py, PyBytes> {
    PyBytes::new(py, &crc32_icv(data).to_bytes())
}

#[pyfunction]
fn michael<'py>(py: Python<'py>, key: &[u8], data: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    Ok(PyBytes::new(py, &michael_mic(&MichaelKey(fixed("Michael key", key)?), data)))
}

#[pyfunction]
fn sbox(v: u16) -> u16 {
    keymix::sbox(v)
}

/// Phase 1: returns the five 16-bit P1K words.
#[pyfunction]
fn phase1(tk: &[u8], ta: &[u8], iv32: u32) -> PyResult<[u16; 5]> {
    Ok(keymix::phase1(&TemporalKey(fixed("tk", tk)?), &MacAddr(fixed("ta", ta)?), iv32).0)
}

/// Phase 2: returns the 16-octet per-packet RC4 key.
#[pyfunction]
fn phase2<'py>(py: Python<'py>, p1k: [u16; 5], tk: &[u8], iv16: u16) -> PyResult<Bound<'py, PyBytes>> {
    Ok(PyBytes::new(py, &keymix::phase2(&P1k(p1k), &TemporalKey(fixed("tk", tk)?), iv16).0))
}

#[pyfunction]
#[pyo3(signature = (ext_iv=false, same_iv32=false, unit_increment=false, fragmented=false, same_msdu=false))]
fn flags_encode(ext_iv: bool, same_iv32: bool, unit_increment: bool, fragmented: bool, same_msdu: bool) -> u8 {
    FlagByte { ext_iv, same_iv32, unit_increment, fragmented, same_msdu }.encode()
}

#[pyfunction]
fn flags_decode(py: Python<'_>, octet: u8) -> PyResult<Bound<'_, PyDict>> {
    let f = FlagByte::decode(octet).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("ext_iv", f.ext_iv)?;
    d.set_item("same_iv32", f.same_iv32)?;
    d.set_item("unit_increment", f.unit_increment)?;
    d.set_item("fragmented", f.fragmented)?;
    d.set_item("same_msdu", f.same_msdu)?;
    Ok(d)
}

/// One wire frame (MPDU).
#[pyclass(name = "Frame", module = "motkip")]
#[derive(Clone)]
struct PyFrame {
    inner: Mpdu,
}

fn kind_name(k: FrameKind) -> &'static str {
    match k {
        FrameKind::Plain => "plain",
        FrameKind::Wep => "wep",
        FrameKind::Tkip => "tkip",
        FrameKind::MoTkipFirst => "motkip-first",
        FrameKind::MoTkipNext => "motkip-next",
    }
}

fn kind_from_name(s: &str) -> PyResult<FrameKind> {
    Ok(match s {
        "plain" => FrameKind::Plain,
        "wep" => FrameKind::Wep,
        "tkip" => FrameKind::Tkip,
        "motkip-first" => FrameKind::MoTkipFirst,
        "motkip-next" => FrameKind::MoTkipNext,
        other => return Err(PyValueError::new_err(format!("unknown frame kind {other:?}"))),
    })
}

#[pymethods]
impl PyFrame {
    #[staticmethod]
    fn parse(kind: &str, data: &[u8]) -> PyResult<Self> {
        Ok(Self { inner: Mpdu::parse(kind_from_name(kind)?, data).map_err(err)? })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        kind_name(self.inner.kind)
    }

    #[getter]
    fn header<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.header)
    }

    #[getter]
    fn body<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.body)
    }

    #[getter]
    fn fragment_index(&self) -> u8 {
        self.inner.fragment_index()
    }

    #[getter]
    fn more_fragments(&self) -> bool {
        self.inner.more_fragments()
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_bytes())
    }

    fn __len__(&self) -> usize {
        self.inner.wire_len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Frame(kind={:?}, wire_len={})", self.kind(), self.inner.wire_len())
    }
}

/// WEP-128: returns the frame (24-octet MAC header placeholder included).
#[pyfunction]
fn wep_encrypt(key: &[u8], iv24: u32, payload: &[u8]) -> PyResult<PyFrame> {
    Ok(PyFrame { inner: wep_encap(&fixed("WEP key", key)?, iv24 & 0xFF_FFFF, payload) })
}

#[pyfunction]
fn wep_decrypt<'py>(py: Python<'py>, key: &[u8], frame: &PyFrame) -> PyResult<Bound<'py, PyBytes>> {
    Ok(PyBytes::new(py, &wep_decap(&fixed("WEP key", key)?, &frame.inner).map_err(err)?))
}

#[pyfunction]
fn dump<'py>(py: Python<'py>, frames: Vec<PyFrame>) -> Bound<'py, PyBytes> {
    let f: Vec<Mpdu> = frames.into_iter().map(|f| f.inner).collect();
    PyBytes::new(py, &encode_dump(&f))
}

#[pyfunction]
fn load(data: &[u8]) -> PyResult<Vec<PyFrame>> {
    Ok(decode_dump(data).map_err(err)?.into_iter().map(|inner| PyFrame { inner }).collect())
}

#[pyclass(name = "KeyMaterial", module = "motkip")]
#[derive(Clone)]
struct PyKeys {
    inner: KeyMaterial,
}

#[pymethods]
impl PyKeys {
    #[new]
    #[pyo3(signature = (seed=0))]
    fn new(seed: u64) -> Self {
        Self { inner: KeyMaterial::from_seed(seed) }
    }

    #[staticmethod]
    fn from_key_file(text: &str) -> PyResult<Self> {
        Ok(Self { inner: KeyMaterial::from_key_file(text).map_err(err)? })
    }

    fn to_key_file(&self) -> String {
        self.inner.to_key_file()
    }

    fn peer(&self) -> Self {
        Self { inner: self.inner.peer() }
    }

    #[getter]
    fn tk<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.tk.0)
    }

    #[getter]
    fn ks<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.ks)
    }

    #[setter]
    fn set_ks(&mut self, ks: &[u8]) -> PyResult<()> {
        self.inner.ks = fixed("ks", ks)?;
        Ok(())
    }
}

/// A security association for one direction of a link.
#[pyclass(name = "Association", module = "motkip", unsendable)]
struct PyAssociation {
    inner: SecurityAssociation,
}

#[pymethods]
impl PyAssociation {
    /// `role` is "transmitter" or "receiver". A receiver given the
    /// transmitter's keys uses their peer view automatically.
    #[new]
    #[pyo3(signature = (scheme, role, keys, ta=None))]
    fn new(scheme: &str, role: &str, keys: &PyKeys, ta: Option<&[u8]>) -> PyResult<Self> {
        let role = match role {
            "transmitter" | "tx" => Role::Transmitter,
            "receiver" | "rx" => Role::Receiver,
            other => return Err(PyValueError::new_err(format!("unknown role {other:?}"))),
        };
        let keys = if role == Role::Receiver { keys.inner.peer() } else { keys.inner.clone() };
        let ta = match ta {
            Some(t) => MacAddr(fixed("ta", t)?),
            None => STATION_ADDR,
        };
        let mut inner = SecurityAssociation::new(parse_scheme(scheme)?, role, keys, ta);
        inner.set_bssid(SERVER_ADDR);
        Ok(Self { inner })
    }

    #[pyo3(signature = (payload, max_fragment=2304, now_ms=0))]
    fn encap(&mut self, payload: &[u8], max_fragment: usize, now_ms: u64) -> PyResult<Vec<PyFrame>> {
        let msdu = Msdu::new(SERVER_ADDR, self.inner.transmitter_address(), payload.to_vec());
        let frames = encapsulate(&mut self.inner, &msdu, max_fragment, now_ms).map_err(err)?;
        Ok(frames.into_iter().map(|inner| PyFrame { inner }).collect())
    }

    /// Returns the MSDU payload once the last fragment arrives, else None.
    #[pyo3(signature = (frame, now_ms=0))]
    fn decap<'py>(&mut self, py: Python<'py>, frame: &PyFrame, now_ms: u64) -> PyResult<Option<Bound<'py, PyBytes>>> {
        let out = decapsulate(&mut self.inner, &frame.inner, now_ms).map_err(err)?;
        Ok(out.map(|m| PyBytes::new(py, &m.payload)))
    }

    fn precompute(&mut self, n: usize) -> PyResult<usize> {
        self.inner.precompute_phase2(n).map_err(err)
    }

    fn rekey(&mut self, keys: &PyKeys) {
        let k = if self.inner.role() == Role::Receiver { keys.inner.peer() } else { keys.inner.clone() };
        self.inner.rekey(k);
    }

    /// Next TSC to be used, as a 48-bit integer.
    #[getter]
    fn next_tsc(&self) -> Option<u64> {
        self.inner.peek_tsc().map(Tsc48::as_u64)
    }

    fn set_next_tsc(&mut self, tsc: u64) -> PyResult<()> {
        if tsc > Tsc48::MAX {
            return Err(PyValueError::new_err("TSC exceeds 48 bits"));
        }
        self.inner.set_next_tsc(Tsc48::from_u64(tsc));
        Ok(())
    }

    fn ops<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let o = self.inner.ops();
        let d = PyDict::new(py);
        d.set_item("phase1", o.phase1)?;
        d.set_item("phase2", o.phase2)?;
        d.set_item("phase2_precomputed", o.phase2_precomputed)?;
        d.set_item("rc4_octets", o.rc4_octets)?;
        d.set_item("michael_calls", o.michael_calls)?;
        d.set_item("michael_octets", o.michael_octets)?;
        d.set_item("crc_octets", o.crc_octets)?;
        d.set_item("crypto_octets", o.crypto_octets())?;
        Ok(d)
    }

    /// Event log as JSON lines.
    fn events(&self) -> String {
        motkip_core::session::events_to_json_lines(self.inner.events())
    }
}

fn metrics_dict<'py>(py: Python<'py>, m: &SessionMetrics) -> PyResult<Bound<'py, PyDict>> {
    let r = m.row();
    let d = PyDict::new(py);
    d.set_item("scheme", r.scheme)?;
    d.set_item("seed", r.seed)?;
    d.set_item("loss", r.loss)?;
    d.set_item("msdu_octets", r.msdu_octets)?;
    d.set_item("msdu_count", r.msdu_count)?;
    d.set_item("on_air_octets", r.on_air_octets)?;
    d.set_item("delivered", r.delivered)?;
    d.set_item("goodput", r.goodput)?;
    d.set_item("phase1", r.phase1)?;
    d.set_item("phase2", r.phase2)?;
    d.set_item("rc4_octets", r.rc4_octets)?;
    d.set_item("michael_octets", r.michael_octets)?;
    d.set_item("mic_failures", r.mic_failures)?;
    d.set_item("crc_octets", r.crc_octets)?;
    d.set_item("phase2_precomputed", r.phase2_precomputed)?;
    d.set_item("crypto_octets", r.crypto_octets)?;
    d.set_item("throughput_kbps", r.throughput_kbps)?;
    d.set_item("frames_sent", m.frames_sent)?;
    d.set_item("lost", m.lost)?;
    d.set_item("corrupted", m.corrupted)?;
    d.set_item("icv_rejects", m.icv_rejects)?;
    d.set_item("replay_rejects", m.replay_rejects)?;
    d.set_item("check_order_violations", m.check_order_violations)?;
    d.set_item("rx_phase2", m.rx_ops.phase2)?;
    d.set_item("ledger_balances", m.ledger_balances())?;
    Ok(d)
}

#[allow(clippy::too_many_arguments)]
fn channel(seed: u64, loss: f64, reorder: usize, corrupt: f64, precompute: usize, max_fragment: usize) -> ChannelConfig {
    ChannelConfig {
        seed,
        loss_prob: loss,
        reorder_depth: reorder,
        corrupt_prob: corrupt,
        precompute_depth: precompute,
        max_fragment,
        ..Default::default()
    }
}

/// Runs one simulated session and returns its metrics row as a dict.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (scheme, msdu_octets, msdu_count, seed=0, loss=0.0, reorder=0, corrupt=0.0, precompute=0, max_fragment=2304, key_seed=0))]
fn run_session<'py>(
    py: Python<'py>,
    scheme: &str,
    msdu_octets: usize,
    msdu_count: u64,
    seed: u64,
    loss: f64,
    reorder: usize,
    corrupt: f64,
    precompute: usize,
    max_fragment: usize,
    key_seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = channel(seed, loss, reorder, corrupt, precompute, max_fragment);
    let profile = TrafficProfile { msdu_octets, msdu_count, scheme: parse_scheme(scheme)? };
    let keys = KeyMaterial::from_seed(key_seed);
    let m = py.allow_threads(|| sim::run_session(&cfg, &profile, &keys)).map_err(err)?;
    metrics_dict(py, &m)
}

/// Runs every scheme for every seed; rows ordered seed-major.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (msdu_octets, msdu_count, seeds, schemes=None, loss=0.0, reorder=0, corrupt=0.0, precompute=0, threads=1))]
fn sweep<'py>(
    py: Python<'py>,
    msdu_octets: usize,
    msdu_count: u64,
    seeds: Vec<u64>,
    schemes: Option<Vec<String>>,
    loss: f64,
    reorder: usize,
    corrupt: f64,
    precompute: usize,
    threads: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let schemes = match schemes {
        Some(list) => list.iter().map(|s| parse_scheme(s)).collect::<PyResult<Vec<_>>>()?,
        None => Scheme::ALL.to_vec(),
    };
    let configs: Vec<_> = seeds.iter().map(|&s| channel(s, loss, reorder, corrupt, precompute, 2304)).collect();
    let profiles: Vec<_> = schemes.iter().map(|&scheme| TrafficProfile { msdu_octets, msdu_count, scheme }).collect();
    let keys = KeyMaterial::from_seed(0);
    let rows = py.allow_threads(|| sim::sweep(&configs, &profiles, &keys, threads)).map_err(err)?;
    rows.iter().map(|m| metrics_dict(py, m)).collect()
}

#[pymodule]
fn motkip(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("MotkipError", py.get_type::<MotkipError>())?;
    m.add("IntegrityError", py.get_type::<IntegrityError>())?;
    m.add("ReplayError", py.get_type::<ReplayError>())?;
    m.add("BlackoutError", py.get_type::<BlackoutError>())?;
    m.add_class::<PyFrame>()?;
    m.add_class::<PyKeys>()?;
    m.add_class::<PyAssociation>()?;
    m.add_function(wrap_pyfunction!(rc4, m)?)?;
    m.add_function(wrap_pyfunction!(crc32, m)?)?;
    m.add_function(wrap_pyfunction!(michael, m)?)?;
    m.add_function(wrap_pyfunction!(sbox, m)?)?;
    m.add_function(wrap_pyfunction!(phase1, m)?)?;
    m.add_function(wrap_pyfunction!(phase2, m)?)?;
    m.add_function(wrap_pyfunction!(flags_encode, m)?)?;
    m.add_function(wrap_pyfunction!(flags_decode, m)?)?;
    m.add_function(wrap_pyfunction!(wep_encrypt, m)?)?;
    m.add_function(wrap_pyfunction!(wep_decrypt, m)?)?;
    m.add_function(wrap_pyfunction!(dump, m)?)?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add_function(wrap_pyfunction!(run_session, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
