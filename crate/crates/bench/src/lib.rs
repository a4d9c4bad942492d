//! Deterministic inputs shared by the benchmarks.

use paperwave_core::audio::{AudioClip, MASTER_RATE};
use paperwave_core::ingest::DocumentText;
use paperwave_core::planner::{Chapter, ChapterPlan};
use paperwave_core::Language;

pub const SAMPLE_PDF: &[u8] = include_bytes!("../../core/tests/fixtures/sample_paper.pdf");

/// A long synthetic paper: `pages` pages of repeated paragraphs.
pub fn synthetic_document(pages: usize) -> DocumentText {
    let paragraph = "Tidal energy schedulers balance storage against forecast demand. \
        We measure how the controller reacts when the forecast drifts, and report the regret \
        accumulated over a simulated season of operation.";
    DocumentText {
        doc_id: "bench".into(),
        pages: (0..pages)
            .map(|p| (0..12).map(|i| format!("{p}.{i} {paragraph}")).collect::<Vec<_>>().join("\n\n"))
            .collect(),
        heading_candidates: Vec::new(),
    }
}

/// A plan with uneven, mostly infeasible chapter sizes.
pub fn ragged_plan(chapters: usize, seed: u64) -> ChapterPlan {
    let mut rng = fastrand::Rng::with_seed(seed);
    ChapterPlan {
        chapters: (0..chapters)
            .map(|i| Chapter { title: format!("Part {i}"), summary: String::new(), turns: rng.u32(1..=30) })
            .collect(),
        language_of_titles: Language::En,
    }
}

/// Stereo noise at the master rate.
pub fn noise_clip(seconds: f64, seed: u64) -> AudioClip {
    let mut rng = fastrand::Rng::with_seed(seed);
    let frames = (seconds * f64::from(MASTER_RATE)) as usize;
    let samples = (0..frames * 2).map(|_| rng.f32() * 0.5 - 0.25).collect();
    AudioClip::new(samples, MASTER_RATE, 2).expect("valid clip")
}
