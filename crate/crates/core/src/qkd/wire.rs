//! Length-prefixed frames for replaying sessions.
//!
//! A frame is a 4-byte big-endian length followed by that many payload bytes.
//!
//! * first message: one frame per classical key (`vk0` and `vk1` on two
//!   lines), then one frame per register in the sparse-state text format;
//! * response: the hash descriptor, the verification key, one frame per
//!   ciphertext line, then an empty frame for the (absent) quantum part;
//! * a single `BLOCKED` frame stands for a response that never arrived.

use thiserror::Error;

use super::{FirstMessage, QkdParams, Response, SessionOutcome};
use crate::ots::OtsVerifyKey;
use crate::params::SchemeParams;
use crate::primitives::ToeplitzHash;
use crate::qpke::{EvCiphertext, EvClassicalKey};
use crate::qsim::SparseState;

pub const BLOCKED: &str = "BLOCKED";

const TRANSCRIPT_TAG: &str = "qkd-transcript v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("frame {frame}: truncated")]
    Truncated { frame: usize },
    #[error("frame {frame}: {msg}")]
    Frame { frame: usize, msg: String },
    #[error("expected {expected} frames, found {found}")]
    FrameCount { expected: usize, found: usize },
    #[error("{section}: {source}")]
    Nested {
        section: &'static str,
        #[source]
        source: Box<WireError>,
    },
}

fn frame_err(frame: usize, msg: impl ToString) -> WireError {
    WireError::Frame {
        frame,
        msg: msg.to_string(),
    }
}

fn nested(section: &'static str) -> impl FnOnce(WireError) -> WireError {
    move |e| WireError::Nested {
        section,
        source: Box::new(e),
    }
}

pub fn write_frame(out: &mut Vec<u8>, payload: &[u8]) {
    let len = u32::try_from(payload.len()).expect("frame shorter than 4 GiB");
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(payload);
}

pub fn read_frames(bytes: &[u8]) -> Result<Vec<&[u8]>, WireError> {
    let mut frames = Vec::new();
    let mut rest = bytes;
    while !rest.is_empty() {
        let frame = frames.len();
        if rest.len() < 4 {
            return Err(WireError::Truncated { frame });
        }
        let (len, tail) = rest.split_at(4);
        let len = u32::from_be_bytes(len.try_into().expect("4 bytes")) as usize;
        if tail.len() < len {
            return Err(WireError::Truncated { frame });
        }
        let (payload, tail) = tail.split_at(len);
        frames.push(payload);
        rest = tail;
    }
    Ok(frames)
}

fn text(frames: &[&[u8]], i: usize) -> Result<String, WireError> {
    String::from_utf8(frames[i].to_vec()).map_err(|_| frame_err(i, "payload is not UTF-8"))
}

fn expect_frames(frames: &[&[u8]], expected: usize) -> Result<(), WireError> {
    if frames.len() != expected {
        return Err(WireError::FrameCount {
            expected,
            found: frames.len(),
        });
    }
    Ok(())
}

pub fn encode_first(msg: &FirstMessage) -> Vec<u8> {
    let mut out = Vec::new();
    for pk in &msg.pks {
        write_frame(&mut out, format!("{}\n{}", pk.vk0, pk.vk1).as_bytes());
    }
    for state in &msg.states {
        write_frame(&mut out, state.to_string().as_bytes());
    }
    out
}

pub fn decode_first(bytes: &[u8], params: &QkdParams) -> Result<FirstMessage, WireError> {
    let frames = read_frames(bytes)?;
    let n = params.instances();
    expect_frames(&frames, 2 * n)?;
    let ots = params.scheme.bit_ots().map_err(|e| frame_err(0, e))?;
    let mut pks = Vec::with_capacity(n);
    for i in 0..n {
        let t = text(&frames, i)?;
        let mut lines = t.lines();
        let mut next_vk = || -> Result<OtsVerifyKey, WireError> {
            let line = lines.next().ok_or_else(|| frame_err(i, "missing verification key"))?;
            OtsVerifyKey::parse(line, &ots).map_err(|e| frame_err(i, e))
        };
        let vk0 = next_vk()?;
        let vk1 = next_vk()?;
        if lines.next().is_some() {
            return Err(frame_err(i, "trailing lines"));
        }
        pks.push(EvClassicalKey { vk0, vk1 });
    }
    let mut states = Vec::with_capacity(n);
    for i in n..2 * n {
        let state: SparseState = text(&frames, i)?.parse().map_err(|e| frame_err(i, e))?;
        states.push(state);
    }
    Ok(FirstMessage { pks, states })
}

/// `None` encodes a blocked response.
pub fn encode_response(resp: Option<&Response>) -> Vec<u8> {
    let mut out = Vec::new();
    match resp {
        None => write_frame(&mut out, BLOCKED.as_bytes()),
        Some(r) => {
            write_frame(&mut out, r.hash.to_string().as_bytes());
            write_frame(&mut out, r.vk.to_string().as_bytes());
            for ct in &r.cts {
                write_frame(&mut out, ct.to_string().as_bytes());
            }
            write_frame(&mut out, b"");
        }
    }
    out
}

pub fn decode_response(bytes: &[u8], params: &QkdParams) -> Result<Option<Response>, WireError> {
    let frames = read_frames(bytes)?;
    if frames.len() == 1 && frames[0] == BLOCKED.as_bytes() {
        return Ok(None);
    }
    let n = params.instances();
    expect_frames(&frames, n + 3)?;
    let hash: ToeplitzHash = text(&frames, 0)?.parse().map_err(|e| frame_err(0, e))?;
    if hash.lambda() != params.lambda() {
        return Err(frame_err(0, "hash output width does not match lambda"));
    }
    let vk = OtsVerifyKey::parse(&text(&frames, 1)?, &params.ots).map_err(|e| frame_err(1, e))?;
    let sig_bits = params.scheme.sig_bits();
    let mut cts = Vec::with_capacity(n);
    for i in 2..n + 2 {
        cts.push(EvCiphertext::parse(&text(&frames, i)?, sig_bits).map_err(|e| frame_err(i, e))?);
    }
    if !frames[n + 2].is_empty() {
        return Err(frame_err(n + 2, "quantum part of the response must be empty"));
    }
    Ok(Some(Response { hash, vk, cts }))
}

/// One full session: both flows and both parties' outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QkdTranscript {
    pub params: QkdParams,
    pub first: FirstMessage,
    /// `None` when the response was blocked or Bob rejected.
    pub response: Option<Response>,
    pub alice: SessionOutcome,
    pub bob: SessionOutcome,
}

impl QkdTranscript {
    pub fn agree(&self) -> bool {
        !self.alice.is_reject() && self.alice == self.bob
    }

    /// Frames: header, first message, response, Alice's outcome, Bob's outcome.
    pub fn encode(&self) -> Vec<u8> {
        let s = &self.params.scheme;
        let header = format!(
            "{TRANSCRIPT_TAG} lambda={} preimage_bits={} owf_rounds={} ots_seed_bits={}",
            s.lambda, s.preimage_bits, s.owf_rounds, s.ots_seed_bits
        );
        let mut out = Vec::new();
        write_frame(&mut out, header.as_bytes());
        write_frame(&mut out, &encode_first(&self.first));
        write_frame(&mut out, &encode_response(self.response.as_ref()));
        write_frame(&mut out, self.alice.to_string().as_bytes());
        write_frame(&mut out, self.bob.to_string().as_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        let frames = read_frames(bytes)?;
        expect_frames(&frames, 5)?;
        let params = parse_header(&text(&frames, 0)?)?;
        let first = decode_first(frames[1], &params).map_err(nested("first message"))?;
        let response = decode_response(frames[2], &params).map_err(nested("response"))?;
        let outcome = |i: usize| -> Result<SessionOutcome, WireError> {
            SessionOutcome::parse(&text(&frames, i)?, params.lambda()).map_err(|e| frame_err(i, e))
        };
        Ok(Self {
            alice: outcome(3)?,
            bob: outcome(4)?,
            params,
            first,
            response,
        })
    }
}

fn parse_header(s: &str) -> Result<QkdParams, WireError> {
    let rest = s
        .strip_prefix(TRANSCRIPT_TAG)
        .ok_or_else(|| frame_err(0, "missing transcript tag"))?;
    let mut scheme = SchemeParams::default();
    for field in rest.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| frame_err(0, format!("bad field {field:?}")))?;
        let bad = || frame_err(0, format!("bad value in {field:?}"));
        match k {
            "lambda" => scheme.lambda = v.parse().map_err(|_| bad())?,
            "preimage_bits" => scheme.preimage_bits = v.parse().map_err(|_| bad())?,
            "owf_rounds" => scheme.owf_rounds = v.parse().map_err(|_| bad())?,
            "ots_seed_bits" => scheme.ots_seed_bits = v.parse().map_err(|_| bad())?,
            _ => return Err(frame_err(0, format!("unknown field {k:?}"))),
        }
    }
    QkdParams::new(scheme).map_err(|e| frame_err(0, e))
}

#[cfg(test)]
mod tests {
    use super::super::{honest_session, qkd_first, qkd_second};
    use super::*;
    use crate::primitives::RngStream;

    fn params() -> QkdParams {
        QkdParams::new(SchemeParams::new(2, 6).unwrap()).unwrap()
    }

    #[test]
    fn frames_round_trip() {
        let mut out = Vec::new();
        write_frame(&mut out, b"abc");
        write_frame(&mut out, b"");
        assert_eq!(&out[..4], &[0, 0, 0, 3]);
        assert_eq!(read_frames(&out).unwrap(), vec![&b"abc"[..], &b""[..]]);
        assert_eq!(read_frames(&out[..5]), Err(WireError::Truncated { frame: 0 }));
        assert_eq!(read_frames(&out[..9]), Err(WireError::Truncated { frame: 1 }));
    }

    #[test]
    fn messages_round_trip() {
        let q = params();
        let mut rng = RngStream::new(1, 0);
        let (first, _) = qkd_first(&q, &mut rng).unwrap();
        assert_eq!(decode_first(&encode_first(&first), &q).unwrap(), first);
        let second = qkd_second(&first, &q, &mut rng).unwrap();
        let resp = second.response().unwrap();
        assert_eq!(decode_response(&encode_response(Some(resp)), &q).unwrap().as_ref(), Some(resp));
        assert_eq!(decode_response(&encode_response(None), &q).unwrap(), None);
    }

    #[test]
    fn transcript_round_trip_and_truncation() {
        let t = honest_session(&params(), &mut RngStream::new(2, 0)).unwrap();
        let bytes = t.encode();
        assert_eq!(QkdTranscript::decode(&bytes).unwrap(), t);
        let err = QkdTranscript::decode(&bytes[..bytes.len() - 3]).unwrap_err();
        assert_eq!(err, WireError::Truncated { frame: 4 });
    }

    #[test]
    fn bad_payload_names_frame() {
        let q = params();
        let (first, _) = qkd_first(&q, &mut RngStream::new(3, 0)).unwrap();
        let mut frames: Vec<Vec<u8>> = read_frames(&encode_first(&first))
            .unwrap()
            .into_iter()
            .map(<[u8]>::to_vec)
            .collect();
        frames[q.instances() + 2] = b"garbage".to_vec();
        let mut bytes = Vec::new();
        for f in &frames {
            write_frame(&mut bytes, f);
        }
        match decode_first(&bytes, &q) {
            Err(WireError::Frame { frame, .. }) => assert_eq!(frame, q.instances() + 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
