//! Pitch, energy and duration from audio, and pitch-track errors between
//! a clean and a noisy rendering of the same tone sequence.
//!
//!     cargo run --release --example pitch_tracking [file.wav]

use easv::manifest::{read_wav, AudioBuffer};
use easv::prosody::{align_tracks, estimate_f0, f1_vuv, rmse_f0, rmse_period, utterance_prosody, ProsodyConfig};
use easv::synthetic::{concat, silence, sine, white_noise};

fn main() -> easv::Result<()> {
    let cfg = ProsodyConfig::default();

    if let Some(path) = std::env::args().nth(1) {
        let audio = read_wav(path.as_ref())?;
        println!("{:?}", utterance_prosody(&audio, &cfg)?);
        return Ok(());
    }

    let sr = 16_000;
    let clean = concat(&[sine(110.0, 0.5, sr, 0.5), silence(0.2, sr), sine(220.0, 0.5, sr, 0.5)]);
    let noise = white_noise(clean.duration_s(), sr, 0.05, 1);
    let noisy = AudioBuffer::new(
        clean.samples().iter().zip(noise.samples()).map(|(a, b)| a + b).collect(),
        sr,
    )?;

    let reference = estimate_f0(&clean, &cfg)?;
    let predicted = estimate_f0(&noisy, &cfg)?;
    let (p, r) = align_tracks(&predicted, &reference);
    for (i, (f, v)) in r.f0_hz.iter().zip(&r.voiced).enumerate().step_by(4) {
        println!("frame {i:>3}: reference {:>7.2} Hz ({}), noisy {:>7.2} Hz", f, if *v { "voiced" } else { "unvoiced" }, p.f0_hz[i]);
    }
    println!("RMSE f0      {:.3} Hz", rmse_f0(&p, &r)?);
    println!("RMSE period  {:.4}", rmse_period(&p, &r)?);
    println!("F1 voiced    {:.4}", f1_vuv(&p, &r)?);
    println!("clean stats  {:?}", utterance_prosody(&clean, &cfg)?);
    Ok(())
}
