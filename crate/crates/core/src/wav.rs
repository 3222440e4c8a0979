//! 16-bit mono PCM WAV input and output.

use std::io::{Cursor, Read};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::Scalar;

/// Decoded samples in `[-1, 1)` and the sample rate in Hz.
#[derive(Clone, Debug, PartialEq)]
pub struct Wav<T> {
    pub samples: Vec<T>,
    pub sample_rate: u32,
}

pub fn read_wav<T: Scalar>(path: impl AsRef<Path>) -> Result<Wav<T>> {
    parse_wav(&std::fs::read(path)?)
}

fn header_error(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::WavMalformed("file ends inside the header".into())
        }
        hound::Error::IoError(e) => Error::Io(e),
        hound::Error::FormatError(msg) => Error::WavMalformed(msg.into()),
        hound::Error::Unsupported => Error::WavUnsupported("encoding is not integer PCM".into()),
        other => Error::WavUnsupported(other.to_string()),
    }
}

fn decode<T: Scalar, R: Read>(reader: WavReader<R>) -> Result<Wav<T>> {
    let spec = reader.spec();
    if spec.channels > 1 {
        return Err(Error::WavMultiChannel(spec.channels));
    }
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::WavUnsupported(format!(
            "{}-bit {:?} samples",
            spec.bits_per_sample, spec.sample_format
        )));
    }
    let declared = reader.len() as usize;
    let scale = T::lit(32768.0).recip();
    let mut samples = Vec::with_capacity(declared);
    for s in reader.into_samples::<i16>() {
        match s {
            Ok(v) => samples.push(T::lit(f64::from(v)) * scale),
            Err(_) => {
                return Err(Error::WavTruncated {
                    declared,
                    available: samples.len(),
                })
            }
        }
    }
    Ok(Wav {
        samples,
        sample_rate: spec.sample_rate,
    })
}

/// Parses an in-memory WAV file.
pub fn parse_wav<T: Scalar>(bytes: &[u8]) -> Result<Wav<T>> {
    decode(WavReader::new(Cursor::new(bytes)).map_err(header_error)?)
}

fn pcm16(x: f64) -> i16 {
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Encodes samples as 16-bit mono PCM, rounding `x·32768` and clamping to the
/// `i16` range.
pub fn encode_wav_pcm16<T: Scalar>(samples: &[T], sample_rate: u32) -> Result<Vec<u8>> {
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut out = Cursor::new(Vec::with_capacity(44 + 2 * samples.len()));
    let mut w = WavWriter::new(&mut out, spec).map_err(header_error)?;
    for &x in samples {
        w.write_sample(pcm16(x.to_f64_lossy())).map_err(header_error)?;
    }
    w.finalize().map_err(header_error)?;
    Ok(out.into_inner())
}

pub fn write_wav_pcm16<T: Scalar>(path: impl AsRef<Path>, samples: &[T], sample_rate: u32) -> Result<()> {
    std::fs::write(path, encode_wav_pcm16(samples, sample_rate)?)?;
    Ok(())
}
