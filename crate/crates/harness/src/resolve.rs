//! Similarity-ranked candidate table for one entity of a built solid.

use std::io::Write;

use cadseq_core::grammar::EntityKind;
use cadseq_core::kernel::Solid;
use cadseq_core::pointer::{enumerate, rank, Candidate, Encoder};

/// Parses `face:ID`, `edge:ID` or `base:ID`.
pub fn parse_entity(s: &str) -> anyhow::Result<Candidate> {
    let (kind, id) = s.split_once(':').ok_or_else(|| anyhow::anyhow!("expected KIND:ID, got {s}"))?;
    let kind = match kind {
        "face" => EntityKind::Face,
        "edge" => EntityKind::Edge,
        "base" => EntityKind::BasePlane,
        other => anyhow::bail!("unknown entity kind {other}"),
    };
    Ok(Candidate { kind, stable_id: id.parse()? })
}

fn kind_name(k: EntityKind) -> &'static str {
    match k {
        EntityKind::Face => "face",
        EntityKind::Edge => "edge",
        EntityKind::BasePlane => "base",
    }
}

/// Writes `rank,kind,stable_id,cosine,same_class` rows, best match first.
pub fn write_table(solid: &Solid, target: &Candidate, seed: u64, out: &mut impl Write) -> anyhow::Result<()> {
    let set = enumerate(solid, &Encoder::new(seed))?;
    let query = set.embedding(target).ok_or_else(|| anyhow::anyhow!("{target:?} is not a candidate"))?.clone();
    let class = set.class_of(target).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "kind", "stable_id", "cosine", "same_class"])?;
    for (i, (c, s)) in rank(&query, &set, target.is_face_like()).into_iter().enumerate() {
        w.write_record([
            i.to_string(),
            kind_name(c.kind).to_string(),
            c.stable_id.to_string(),
            format!("{s:.12}"),
            class.contains(&c).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
