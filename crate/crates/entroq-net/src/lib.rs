//! Two-device estimation harness over newline-delimited JSON on TCP.
//!
//! A device hosts exactly one state and answers sampling requests for the
//! probability families its state can serve: the rho device answers the
//! `v_basis` and `swap_test` families, the sigma device answers
//! `u_dagger_basis` (the families are functionals of those states). The
//! coordinator runs the ordinary estimators against remote sources, so a
//! distributed run computes exactly the same numbers as an in-process run:
//! exact-mode responses round-trip f64 values losslessly through JSON, and
//! shot-mode seeds travel inside each request.
//!
//! Wire format, one message per line:
//!
//! ```text
//! request:  {"id":1,"family":"v_basis","circuit":{...},"params":[..],"shots":0,"seed":0}
//! response: {"id":1,"probs":[..],"shots":0}
//! error:    {"id":1,"error":"CODE","detail":"..."}
//! ```
//!
//! Matrix entries of the hosted states never appear on the wire; only
//! circuit descriptors, parameters and probabilities cross it.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use entroq_core::circuits::{Gate, ParamCircuit};
use entroq_core::error::{Error, Result};
use entroq_core::quad::{grj_rule, FixedEnd, WeightKind};
use entroq_core::sampling::{
    prob_u_dagger_basis, prob_v_basis, sample_bernoulli_each, sample_shots, swap_test_probs,
    ProbVector,
};
use entroq_core::states::DensityMatrix;
use entroq_core::vqa::{
    estimate_ft_with, estimate_petz_with, estimate_relative_entropy_with, EstimationReport,
    FtConfig, FtResult, ProbSource,
};

/// Maximum register width a device will simulate.
pub const MAX_DEVICE_QUBITS: usize = 6;

/// Which state a device hosts, fixing the families it serves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceRole {
    /// Hosts rho; serves `v_basis` and `swap_test`.
    Rho,
    /// Hosts sigma; serves `u_dagger_basis`.
    Sigma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    VBasis,
    UDaggerBasis,
    SwapTest,
}

/// Circuit payload of a request. Single-circuit families fill `gates`;
/// the swap-test family carries both circuits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitDescriptor {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gates: Option<Vec<Gate>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_gates: Option<Vec<Gate>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_gates: Option<Vec<Gate>>,
    /// Length of the theta prefix of `params` for the swap-test family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleRequest {
    pub id: u64,
    pub family: Family,
    pub circuit: CircuitDescriptor,
    pub params: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleResponse {
    pub id: u64,
    pub probs: Vec<f64>,
    pub shots: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub id: u64,
    pub error: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireReply {
    Ok(SampleResponse),
    Err(ErrorResponse),
}

fn circuit_from(n: usize, gates: &[Gate]) -> Result<ParamCircuit> {
    ParamCircuit::new(n, gates.to_vec())
}

/// Computes the reply for one request against the hosted state. Pure in
/// (state, request), so concurrent handling is safe.
pub fn answer_request(role: DeviceRole, state: &DensityMatrix, req: &SampleRequest) -> WireReply {
    let fail = |code: &str, detail: String| {
        WireReply::Err(ErrorResponse {
            id: req.id,
            error: code.into(),
            detail,
        })
    };
    if req.circuit.n != state.n_qubits() || req.circuit.n > MAX_DEVICE_QUBITS {
        return fail(
            "DIMENSION_MISMATCH",
            format!(
                "device hosts {} qubit(s), request wants {}",
                state.n_qubits(),
                req.circuit.n
            ),
        );
    }
    let allowed = matches!(
        (role, req.family),
        (DeviceRole::Rho, Family::VBasis)
            | (DeviceRole::Rho, Family::SwapTest)
            | (DeviceRole::Sigma, Family::UDaggerBasis)
    );
    if !allowed {
        return fail(
            "UNSUPPORTED_FAMILY",
            format!("{:?} device cannot serve {:?}", role, req.family),
        );
    }
    let exact = match req.family {
        Family::VBasis => req
            .circuit
            .gates
            .as_deref()
            .ok_or_else(|| Error::Validation("missing circuit gates".into()))
            .and_then(|g| circuit_from(req.circuit.n, g))
            .and_then(|c| prob_v_basis(state, &c, &req.params)),
        Family::UDaggerBasis => req
            .circuit
            .gates
            .as_deref()
            .ok_or_else(|| Error::Validation("missing circuit gates".into()))
            .and_then(|g| circuit_from(req.circuit.n, g))
            .and_then(|c| prob_u_dagger_basis(state, &c, &req.params)),
        Family::SwapTest => (|| {
            let ug = req
                .circuit
                .u_gates
                .as_deref()
                .ok_or_else(|| Error::Validation("missing u gates".into()))?;
            let vg = req
                .circuit
                .v_gates
                .as_deref()
                .ok_or_else(|| Error::Validation("missing v gates".into()))?;
            let n_theta = req
                .circuit
                .n_theta
                .ok_or_else(|| Error::Validation("missing n_theta".into()))?;
            if n_theta > req.params.len() {
                return Err(Error::Validation("n_theta exceeds parameter count".into()));
            }
            let u = circuit_from(req.circuit.n, ug)?;
            let v = circuit_from(req.circuit.n, vg)?;
            swap_test_probs(
                state,
                &u,
                &req.params[..n_theta],
                &v,
                &req.params[n_theta..],
            )
        })(),
    };
    let exact = match exact {
        Ok(p) => p,
        Err(e) => return fail("MALFORMED_REQUEST", e.to_string()),
    };
    let sampled = if req.shots == 0 {
        Ok(exact)
    } else if req.family == Family::SwapTest {
        // One binary measurement per basis index.
        sample_bernoulli_each(&exact, req.shots, req.seed)
    } else {
        sample_shots(&exact, req.shots, req.seed)
    };
    match sampled {
        Ok(p) => WireReply::Ok(SampleResponse {
            id: req.id,
            probs: p.probs,
            shots: p.shots,
        }),
        Err(e) => fail("MALFORMED_REQUEST", e.to_string()),
    }
}

/// A running device service; dropping the handle stops the accept loop.
pub struct DeviceHandle {
    pub addr: std::net::SocketAddr,
    stop: Arc<AtomicBool>,
    join: Option<std::thread::JoinHandle<()>>,
}

impl Drop for DeviceHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Nudge the accept loop so it observes the stop flag.
        let _ = TcpStream::connect(self.addr);
        if let Some(join) = self.join.take() {
            let _ = join.join();
        }
    }
}

/// Serves one state on the given bind address until the handle is dropped.
/// Each connection is handled on its own thread; requests are answered in
/// per-connection order.
pub fn serve_device(
    state: DensityMatrix,
    role: DeviceRole,
    bind: impl ToSocketAddrs,
) -> Result<DeviceHandle> {
    let listener = TcpListener::bind(bind)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let state = Arc::new(state);
    let stop_inner = stop.clone();
    let join = std::thread::spawn(move || {
        for incoming in listener.incoming() {
            if stop_inner.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = incoming else { continue };
            let state = state.clone();
            std::thread::spawn(move || {
                let _ = handle_connection(stream, role, &state);
            });
        }
    });
    Ok(DeviceHandle {
        addr,
        stop,
        join: Some(join),
    })
}

fn handle_connection(
    stream: TcpStream,
    role: DeviceRole,
    state: &DensityMatrix,
) -> std::io::Result<()> {
    let mut writer = stream.try_clone()?;
    let reader = BufReader::new(stream);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<SampleRequest>(&line) {
            Ok(req) => answer_request(role, state, &req),
            Err(e) => WireReply::Err(ErrorResponse {
                id: 0,
                error: "MALFORMED_REQUEST".into(),
                detail: e.to_string(),
            }),
        };
        let mut payload = serde_json::to_string(&reply).expect("reply serializes");
        payload.push('\n');
        writer.write_all(payload.as_bytes())?;
    }
    Ok(())
}

/// Client half of the protocol: one persistent connection with reconnect
/// and bounded retries. Requests are pure, so a resend after a transport
/// failure returns the same answer.
pub struct DeviceClient {
    addr: String,
    stream: Option<BufReader<TcpStream>>,
    next_id: u64,
    pub requests_sent: u64,
    capture: Option<Arc<Mutex<Vec<String>>>>,
}

const RETRIES: usize = 3;
const RETRY_DELAY: Duration = Duration::from_millis(200);
const IO_TIMEOUT: Duration = Duration::from_secs(20);

impl DeviceClient {
    pub fn connect(addr: &str) -> Result<Self> {
        let mut client = Self {
            addr: addr.to_string(),
            stream: None,
            next_id: 0,
            requests_sent: 0,
            capture: None,
        };
        client.reconnect()?;
        Ok(client)
    }

    /// Records every wire line (sent and received) into the given buffer.
    pub fn with_capture(mut self, capture: Arc<Mutex<Vec<String>>>) -> Self {
        self.capture = Some(capture);
        self
    }

    fn reconnect(&mut self) -> Result<()> {
        let stream = TcpStream::connect(&self.addr)
            .map_err(|e| Error::Transport(format!("connect {}: {e}", self.addr)))?;
        stream.set_read_timeout(Some(IO_TIMEOUT))?;
        stream.set_write_timeout(Some(IO_TIMEOUT))?;
        self.stream = Some(BufReader::new(stream));
        Ok(())
    }

    fn try_round_trip(&mut self, line: &str) -> std::io::Result<String> {
        if self.stream.is_none() {
            self.reconnect().map_err(std::io::Error::other)?;
        }
        let reader = self.stream.as_mut().expect("just connected");
        reader.get_mut().write_all(line.as_bytes())?;
        let mut reply = String::new();
        let n = reader.read_line(&mut reply)?;
        if n == 0 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                "device closed the connection",
            ));
        }
        Ok(reply)
    }

    /// Sends one request, retrying through reconnects on transport errors.
    pub fn request(&mut self, mut req: SampleRequest) -> Result<ProbVector> {
        self.next_id += 1;
        req.id = self.next_id;
        let mut line = serde_json::to_string(&req)?;
        line.push('\n');

        let mut last_err = None;
        for attempt in 0..RETRIES {
            if attempt > 0 {
                std::thread::sleep(RETRY_DELAY);
                if self.reconnect().is_err() {
                    continue;
                }
            }
            match self.try_round_trip(&line) {
                Ok(reply) => {
                    if let Some(cap) = &self.capture {
                        let mut log = cap.lock().expect("capture lock");
                        log.push(line.trim_end().to_string());
                        log.push(reply.trim_end().to_string());
                    }
                    self.requests_sent += 1;
                    return match serde_json::from_str::<WireReply>(&reply)? {
                        WireReply::Ok(ok) => {
                            if ok.id != req.id {
                                return Err(Error::Transport(format!(
                                    "response id {} does not match request {}",
                                    ok.id, req.id
                                )));
                            }
                            Ok(ProbVector {
                                probs: ok.probs,
                                shots: ok.shots,
                            })
                        }
                        WireReply::Err(err) => Err(Error::Transport(format!(
                            "device error {}: {}",
                            err.error, err.detail
                        ))),
                    };
                }
                Err(e) => {
                    self.stream = None;
                    last_err = Some(e);
                }
            }
        }
        Err(Error::Transport(format!(
            "request failed after {RETRIES} attempts: {}",
            last_err.map_or_else(|| "unknown".into(), |e| e.to_string())
        )))
    }
}

/// Remote probability source: the rho device answers `v_basis` and
/// `swap_test`, the sigma device answers `u_dagger_basis`. The swap-test
/// and basis requests of one triple are issued concurrently (one thread
/// per device connection) and joined before the classical step.
pub struct RemoteSource {
    rho: DeviceClient,
    sigma: DeviceClient,
    n_qubits: usize,
}

impl RemoteSource {
    pub fn connect(rho_addr: &str, sigma_addr: &str, n_qubits: usize) -> Result<Self> {
        Ok(Self {
            rho: DeviceClient::connect(rho_addr)?,
            sigma: DeviceClient::connect(sigma_addr)?,
            n_qubits,
        })
    }

    pub fn with_capture(mut self, capture: Arc<Mutex<Vec<String>>>) -> Self {
        self.rho = self.rho.with_capture(capture.clone());
        self.sigma = self.sigma.with_capture(capture);
        self
    }

    pub fn request_counts(&self) -> (u64, u64) {
        (self.rho.requests_sent, self.sigma.requests_sent)
    }

    fn v_basis_request(
        &self,
        v: &ParamCircuit,
        beta: &[f64],
        shots: u64,
        seed: u64,
    ) -> SampleRequest {
        SampleRequest {
            id: 0,
            family: Family::VBasis,
            circuit: CircuitDescriptor {
                n: self.n_qubits,
                gates: Some(v.gates.clone()),
                u_gates: None,
                v_gates: None,
                n_theta: None,
            },
            params: beta.to_vec(),
            shots,
            seed,
        }
    }

    fn u_dagger_request(
        &self,
        u: &ParamCircuit,
        theta: &[f64],
        shots: u64,
        seed: u64,
    ) -> SampleRequest {
        SampleRequest {
            id: 0,
            family: Family::UDaggerBasis,
            circuit: CircuitDescriptor {
                n: self.n_qubits,
                gates: Some(u.gates.clone()),
                u_gates: None,
                v_gates: None,
                n_theta: None,
            },
            params: theta.to_vec(),
            shots,
            seed,
        }
    }

    fn swap_request(
        &self,
        u: &ParamCircuit,
        theta: &[f64],
        v: &ParamCircuit,
        beta: &[f64],
        shots: u64,
        seed: u64,
    ) -> SampleRequest {
        let mut params = theta.to_vec();
        params.extend_from_slice(beta);
        SampleRequest {
            id: 0,
            family: Family::SwapTest,
            circuit: CircuitDescriptor {
                n: self.n_qubits,
                gates: None,
                u_gates: Some(u.gates.clone()),
                v_gates: Some(v.gates.clone()),
                n_theta: Some(theta.len()),
            },
            params,
            shots,
            seed,
        }
    }
}

impl ProbSource for RemoteSource {
    fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    fn v_basis(
        &mut self,
        v: &ParamCircuit,
        beta: &[f64],
        shots: u64,
        seed: u64,
    ) -> Result<ProbVector> {
        let req = self.v_basis_request(v, beta, shots, seed);
        self.rho.request(req)
    }

    fn u_dagger_basis(
        &mut self,
        u: &ParamCircuit,
        theta: &[f64],
        shots: u64,
        seed: u64,
    ) -> Result<ProbVector> {
        let req = self.u_dagger_request(u, theta, shots, seed);
        self.sigma.request(req)
    }

    fn swap_test(
        &mut self,
        u: &ParamCircuit,
        theta: &[f64],
        v: &ParamCircuit,
        beta: &[f64],
        shots: u64,
        seed: u64,
    ) -> Result<ProbVector> {
        let req = self.swap_request(u, theta, v, beta, shots, seed);
        self.rho.request(req)
    }

    fn triple(
        &mut self,
        u: &ParamCircuit,
        theta: &[f64],
        v: &ParamCircuit,
        beta: &[f64],
        shots: u64,
        seeds: [u64; 3],
    ) -> Result<(ProbVector, ProbVector, ProbVector)> {
        // Seeds were assigned by the caller; the sigma-device request runs
        // concurrently with the rho-device pair.
        let u_req = self.u_dagger_request(u, theta, shots, seeds[0]);
        let v_req = self.v_basis_request(v, beta, shots, seeds[1]);
        let chi_req = self.swap_request(u, theta, v, beta, shots, seeds[2]);
        std::thread::scope(|scope| {
            let sigma = &mut self.sigma;
            let theta_task = scope.spawn(move || sigma.request(u_req));
            let pb = self.rho.request(v_req)?;
            let pc = self.rho.request(chi_req)?;
            let pt = theta_task.join().expect("sigma request thread")?;
            Ok((pt, pb, pc))
        })
    }
}

/// Which estimation a distributed run performs.
#[derive(Clone, Debug)]
pub enum EstimateKind {
    Ft {
        t: f64,
    },
    Relent {
        m: usize,
        fixed_end: FixedEnd,
    },
    Petz {
        alpha: f64,
        m: usize,
        fixed_end: FixedEnd,
    },
}

/// Report of a distributed estimation with per-device request counts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributedReport {
    pub report: EstimationReport,
    pub rho_requests: u64,
    pub sigma_requests: u64,
}

/// Runs an estimation against two remote devices. Numerical semantics are
/// identical to the in-process estimators given the same configuration.
pub fn distributed_estimate(
    config: &FtConfig,
    rho_addr: &str,
    sigma_addr: &str,
    n_qubits: usize,
    kind: &EstimateKind,
) -> Result<DistributedReport> {
    distributed_estimate_impl(config, rho_addr, sigma_addr, n_qubits, kind, None)
}

/// Same as [`distributed_estimate`] with a wire capture for protocol tests.
pub fn distributed_estimate_captured(
    config: &FtConfig,
    rho_addr: &str,
    sigma_addr: &str,
    n_qubits: usize,
    kind: &EstimateKind,
    capture: Arc<Mutex<Vec<String>>>,
) -> Result<DistributedReport> {
    distributed_estimate_impl(config, rho_addr, sigma_addr, n_qubits, kind, Some(capture))
}

fn distributed_estimate_impl(
    config: &FtConfig,
    rho_addr: &str,
    sigma_addr: &str,
    n_qubits: usize,
    kind: &EstimateKind,
    capture: Option<Arc<Mutex<Vec<String>>>>,
) -> Result<DistributedReport> {
    let rho_count = Arc::new(AtomicU64::new(0));
    let sigma_count = Arc::new(AtomicU64::new(0));
    let make_source = || -> Result<RemoteSource> {
        let mut source = RemoteSource::connect(rho_addr, sigma_addr, n_qubits)?;
        if let Some(cap) = &capture {
            source = source.with_capture(cap.clone());
        }
        Ok(source)
    };

    // Counted wrapper so per-device totals survive source teardown.
    struct Counted {
        inner: RemoteSource,
        rho: Arc<AtomicU64>,
        sigma: Arc<AtomicU64>,
    }
    impl Drop for Counted {
        fn drop(&mut self) {
            let (r, s) = self.inner.request_counts();
            self.rho.fetch_add(r, Ordering::SeqCst);
            self.sigma.fetch_add(s, Ordering::SeqCst);
        }
    }
    impl ProbSource for Counted {
        fn dim(&self) -> usize {
            self.inner.dim()
        }
        fn v_basis(
            &mut self,
            v: &ParamCircuit,
            beta: &[f64],
            shots: u64,
            seed: u64,
        ) -> Result<ProbVector> {
            self.inner.v_basis(v, beta, shots, seed)
        }
        fn u_dagger_basis(
            &mut self,
            u: &ParamCircuit,
            theta: &[f64],
            shots: u64,
            seed: u64,
        ) -> Result<ProbVector> {
            self.inner.u_dagger_basis(u, theta, shots, seed)
        }
        fn swap_test(
            &mut self,
            u: &ParamCircuit,
            theta: &[f64],
            v: &ParamCircuit,
            beta: &[f64],
            shots: u64,
            seed: u64,
        ) -> Result<ProbVector> {
            self.inner.swap_test(u, theta, v, beta, shots, seed)
        }
        fn triple(
            &mut self,
            u: &ParamCircuit,
            theta: &[f64],
            v: &ParamCircuit,
            beta: &[f64],
            shots: u64,
            seeds: [u64; 3],
        ) -> Result<(ProbVector, ProbVector, ProbVector)> {
            self.inner.triple(u, theta, v, beta, shots, seeds)
        }
    }

    let factory = || -> Box<dyn ProbSource + Send> {
        Box::new(Counted {
            inner: make_source().expect("device reachable"),
            rho: rho_count.clone(),
            sigma: sigma_count.clone(),
        })
    };

    let report = match kind {
        EstimateKind::Ft { t } => {
            let mut source = factory();
            let node = estimate_ft_with(source.as_mut(), *t, config)?;
            drop(source);
            synthetic_ft_report(node)
        }
        EstimateKind::Relent { m, fixed_end } => {
            let rule = grj_rule(*m, *fixed_end, WeightKind::Uniform)?;
            estimate_relative_entropy_with(factory, &rule, config)?
        }
        EstimateKind::Petz {
            alpha,
            m,
            fixed_end,
        } => {
            if *alpha == 2.0 {
                estimate_petz_with(factory, 2.0, None, config)?
            } else {
                let rule = grj_rule(*m, *fixed_end, WeightKind::Jacobi { alpha: *alpha })?;
                estimate_petz_with(factory, *alpha, Some(&rule), config)?
            }
        }
    };
    Ok(DistributedReport {
        report,
        rho_requests: rho_count.load(Ordering::SeqCst),
        sigma_requests: sigma_count.load(Ordering::SeqCst),
    })
}

/// Wraps a single f_t node into a report shell so every distributed run
/// returns the same envelope.
fn synthetic_ft_report(node: FtResult) -> EstimationReport {
    EstimationReport {
        kind: entroq_core::vqa::ReportKind::Petz2,
        aggregate: node.value,
        quasi: None,
        rule: None,
        per_node: vec![node],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use entroq_core::circuits::ansatz_u3;
    use entroq_core::linalg::CMatrix;

    fn diag_state(entries: &[f64]) -> DensityMatrix {
        DensityMatrix::new(CMatrix::diag_real(entries)).unwrap()
    }

    #[test]
    fn wire_messages_are_bit_exact() {
        let req = SampleRequest {
            id: 3,
            family: Family::VBasis,
            circuit: CircuitDescriptor {
                n: 1,
                gates: Some(vec![]),
                u_gates: None,
                v_gates: None,
                n_theta: None,
            },
            params: vec![0.5],
            shots: 100,
            seed: 7,
        };
        let line = serde_json::to_string(&req).unwrap();
        assert_eq!(
            line,
            r#"{"id":3,"family":"v_basis","circuit":{"n":1,"gates":[]},"params":[0.5],"shots":100,"seed":7}"#
        );
        let resp = SampleResponse {
            id: 3,
            probs: vec![0.3, 0.7],
            shots: 100,
        };
        assert_eq!(
            serde_json::to_string(&resp).unwrap(),
            r#"{"id":3,"probs":[0.3,0.7],"shots":100}"#
        );
        let err = ErrorResponse {
            id: 3,
            error: "UNSUPPORTED_FAMILY".into(),
            detail: "x".into(),
        };
        assert_eq!(
            serde_json::to_string(&err).unwrap(),
            r#"{"id":3,"error":"UNSUPPORTED_FAMILY","detail":"x"}"#
        );
    }

    #[test]
    fn answer_request_serves_and_rejects() {
        let rho = diag_state(&[0.3, 0.7]);
        let req = SampleRequest {
            id: 1,
            family: Family::VBasis,
            circuit: CircuitDescriptor {
                n: 1,
                gates: Some(vec![]),
                u_gates: None,
                v_gates: None,
                n_theta: None,
            },
            params: vec![],
            shots: 0,
            seed: 0,
        };
        match answer_request(DeviceRole::Rho, &rho, &req) {
            WireReply::Ok(ok) => assert_eq!(ok.probs, vec![0.3, 0.7]),
            other => panic!("expected answer, got {other:?}"),
        }
        match answer_request(DeviceRole::Sigma, &rho, &req) {
            WireReply::Err(e) => assert_eq!(e.error, "UNSUPPORTED_FAMILY"),
            other => panic!("expected rejection, got {other:?}"),
        }

        let mut wide = req.clone();
        wide.circuit.n = 3;
        match answer_request(DeviceRole::Rho, &rho, &wide) {
            WireReply::Err(e) => assert_eq!(e.error, "DIMENSION_MISMATCH"),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn swap_request_round_trip_against_core() {
        let rho = diag_state(&[0.25, 0.75]);
        let u = ansatz_u3();
        let theta = [0.3, 0.9, 1.4];
        let beta = [1.0, 0.2, 2.2];
        let mut params = theta.to_vec();
        params.extend_from_slice(&beta);
        let req = SampleRequest {
            id: 9,
            family: Family::SwapTest,
            circuit: CircuitDescriptor {
                n: 1,
                gates: None,
                u_gates: Some(u.gates.clone()),
                v_gates: Some(u.gates.clone()),
                n_theta: Some(3),
            },
            params,
            shots: 0,
            seed: 0,
        };
        let expected = swap_test_probs(&rho, &u, &theta, &u, &beta).unwrap();
        match answer_request(DeviceRole::Rho, &rho, &req) {
            WireReply::Ok(ok) => assert_eq!(ok.probs, expected.probs),
            other => panic!("expected answer, got {other:?}"),
        }
    }
}
