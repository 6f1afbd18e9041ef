//! On-disk layout: `meta.json`, `postings.bin`, `idmap.bin`.
//!
//! Both binary files start with a 4-byte magic and a little-endian `u32` format
//! version. Postings are delta-encoded varints.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::varint::{self, Reader};
use super::{CollectionStats, Index, IndexMeta, Posting};
use crate::corpus::Genre;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

const POSTINGS_MAGIC: &[u8; 4] = b"CSPO";
const IDMAP_MAGIC: &[u8; 4] = b"CSID";
const META_FILE: &str = "meta.json";
const POSTINGS_FILE: &str = "postings.bin";
const IDMAP_FILE: &str = "idmap.bin";

impl Index {
    pub fn persist(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, bytes: &[u8]| {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(path, e))
        };
        write(META_FILE, &self.encode_meta())?;
        write(POSTINGS_FILE, &self.encode_postings())?;
        write(IDMAP_FILE, &self.encode_idmap())?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Index> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read(&path).map_err(|e| Error::io(path, e))
        };

        let meta_bytes = read(META_FILE)?;
        let raw: serde_json::Value =
            serde_json::from_slice(&meta_bytes).map_err(|e| Error::format(META_FILE, e.to_string()))?;
        let found = raw
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::format(META_FILE, "missing format_version"))?;
        if found != u64::from(FORMAT_VERSION) {
            return Err(Error::VersionMismatch {
                expected: FORMAT_VERSION,
                found: u32::try_from(found).unwrap_or(u32::MAX),
            });
        }
        let meta: IndexMeta = serde_json::from_value(raw).map_err(|e| Error::format(META_FILE, e.to_string()))?;

        let ids = decode_idmap(&read(IDMAP_FILE)?)?;
        let terms = decode_postings(&read(POSTINGS_FILE)?, ids.passage_ids.len())?;
        assemble(meta, ids, terms)
    }

    /// SHA-256 over the serialized index, used as provenance in reports.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.encode_meta());
        h.update(self.encode_postings());
        h.update(self.encode_idmap());
        hex::encode(h.finalize())
    }

    fn encode_meta(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(&self.meta).expect("meta serializes");
        out.push(b'\n');
        out
    }

    fn encode_postings(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(POSTINGS_MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        varint::put(&mut buf, self.vocab.len() as u64);
        for (tid, term) in self.vocab.iter().enumerate() {
            varint::put_bytes(&mut buf, term.as_bytes());
            varint::put(&mut buf, self.cf[tid]);
            let plist = &self.postings[tid];
            varint::put(&mut buf, plist.len() as u64);
            let mut prev = 0u32;
            for p in plist {
                varint::put(&mut buf, u64::from(p.passage_ref - prev));
                varint::put(&mut buf, u64::from(p.tf));
                prev = p.passage_ref;
            }
        }
        buf
    }

    fn encode_idmap(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(IDMAP_MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        varint::put(&mut buf, self.passage_ids.len() as u64);
        for r in 0..self.passage_ids.len() {
            varint::put_bytes(&mut buf, self.passage_ids[r].as_bytes());
            varint::put_bytes(&mut buf, self.doc_ids[r].as_bytes());
            buf.push(match self.genres[r] {
                Genre::Fiction => 0,
                Genre::NonFiction => 1,
            });
            varint::put(&mut buf, u64::from(self.lengths[r]));
        }
        buf
    }
}

struct IdMap {
    passage_ids: Vec<String>,
    doc_ids: Vec<String>,
    genres: Vec<Genre>,
    lengths: Vec<u32>,
}

struct TermTable {
    vocab: Vec<String>,
    cf: Vec<u64>,
    postings: Vec<Vec<Posting>>,
}

fn check_header(r: &mut Reader<'_>, magic: &[u8; 4], file: &str) -> Result<()> {
    if r.take(4) != Some(magic.as_slice()) {
        return Err(Error::format(file, "bad magic bytes"));
    }
    let found = r.u32_le().ok_or_else(|| Error::format(file, "truncated header"))?;
    if found != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: FORMAT_VERSION,
            found,
        });
    }
    Ok(())
}

fn utf8(bytes: Option<&[u8]>, file: &str) -> Result<String> {
    let bytes = bytes.ok_or_else(|| Error::format(file, "truncated string"))?;
    String::from_utf8(bytes.to_vec()).map_err(|_| Error::format(file, "invalid UTF-8"))
}

fn decode_idmap(buf: &[u8]) -> Result<IdMap> {
    let file = IDMAP_FILE;
    let truncated = || Error::format(file, "truncated");
    let mut r = Reader::new(buf);
    check_header(&mut r, IDMAP_MAGIC, file)?;
    let n = r.varint().ok_or_else(truncated)? as usize;
    // Each entry takes at least 4 bytes; reject absurd counts before allocating.
    if n > buf.len() {
        return Err(Error::format(file, "passage count exceeds file size"));
    }
    let mut ids = IdMap {
        passage_ids: Vec::with_capacity(n),
        doc_ids: Vec::with_capacity(n),
        genres: Vec::with_capacity(n),
        lengths: Vec::with_capacity(n),
    };
    for _ in 0..n {
        ids.passage_ids.push(utf8(r.bytes(), file)?);
        ids.doc_ids.push(utf8(r.bytes(), file)?);
        ids.genres.push(match r.u8().ok_or_else(truncated)? {
            0 => Genre::Fiction,
            1 => Genre::NonFiction,
            g => return Err(Error::format(file, format!("unknown genre byte {g}"))),
        });
        let len = r.varint().ok_or_else(truncated)?;
        ids.lengths
            .push(u32::try_from(len).map_err(|_| Error::format(file, "passage length overflow"))?);
    }
    if !r.is_empty() {
        return Err(Error::format(file, "trailing bytes"));
    }
    if ids.passage_ids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::format(file, "passage ids not strictly sorted"));
    }
    Ok(ids)
}

fn decode_postings(buf: &[u8], num_passages: usize) -> Result<TermTable> {
    let file = POSTINGS_FILE;
    let truncated = || Error::format(file, "truncated");
    let mut r = Reader::new(buf);
    check_header(&mut r, POSTINGS_MAGIC, file)?;
    let n_terms = r.varint().ok_or_else(truncated)? as usize;
    if n_terms > buf.len() {
        return Err(Error::format(file, "term count exceeds file size"));
    }
    let mut table = TermTable {
        vocab: Vec::with_capacity(n_terms),
        cf: Vec::with_capacity(n_terms),
        postings: Vec::with_capacity(n_terms),
    };
    for _ in 0..n_terms {
        let term = utf8(r.bytes(), file)?;
        if table.vocab.last().is_some_and(|prev| *prev >= term) {
            return Err(Error::format(file, "vocabulary not strictly sorted"));
        }
        let cf = r.varint().ok_or_else(truncated)?;
        let df = r.varint().ok_or_else(truncated)? as usize;
        if df == 0 || df > num_passages {
            return Err(Error::format(file, format!("term {term:?} has df {df}")));
        }
        let mut plist = Vec::with_capacity(df);
        let mut prev: Option<u64> = None;
        let mut tf_sum = 0u64;
        for _ in 0..df {
            let delta = r.varint().ok_or_else(truncated)?;
            let tf = r.varint().ok_or_else(truncated)?;
            let pref = match prev {
                None => delta,
                Some(_) if delta == 0 => return Err(Error::format(file, "duplicate posting")),
                Some(p) => p.checked_add(delta).ok_or_else(|| Error::format(file, "posting overflow"))?,
            };
            if pref >= num_passages as u64 || tf == 0 || tf > u64::from(u32::MAX) {
                return Err(Error::format(file, format!("invalid posting for {term:?}")));
            }
            tf_sum += tf;
            plist.push(Posting {
                passage_ref: pref as u32,
                tf: tf as u32,
            });
            prev = Some(pref);
        }
        if tf_sum != cf {
            return Err(Error::format(file, format!("cf mismatch for {term:?}")));
        }
        table.vocab.push(term);
        table.cf.push(cf);
        table.postings.push(plist);
    }
    if !r.is_empty() {
        return Err(Error::format(file, "trailing bytes"));
    }
    Ok(table)
}

fn assemble(meta: IndexMeta, ids: IdMap, terms: TermTable) -> Result<Index> {
    let n = ids.passage_ids.len();
    if n == 0 {
        return Err(Error::EmptyCollection);
    }
    let mut forward: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for (tid, plist) in terms.postings.iter().enumerate() {
        for p in plist {
            forward[p.passage_ref as usize].push((tid as u32, p.tf));
        }
    }
    for (r, fwd) in forward.iter().enumerate() {
        let len: u64 = fwd.iter().map(|&(_, tf)| u64::from(tf)).sum();
        if len != u64::from(ids.lengths[r]) || len == 0 {
            return Err(Error::format(IDMAP_FILE, format!("length mismatch for {}", ids.passage_ids[r])));
        }
    }
    if let Some(r) = (0..n).find(|&r| !meta.label.admits(ids.genres[r])) {
        return Err(Error::format(IDMAP_FILE, format!("{} does not belong in {}", ids.passage_ids[r], meta.label)));
    }
    let total_tokens: u64 = ids.lengths.iter().map(|&l| u64::from(l)).sum();
    if meta.num_passages != n || meta.total_tokens != total_tokens || meta.vocabulary_size != terms.vocab.len() {
        return Err(Error::format(META_FILE, "counts disagree with binary files"));
    }
    let term_ids: HashMap<String, u32> = terms
        .vocab
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    Ok(Index {
        stats: CollectionStats {
            num_passages: n,
            total_tokens,
            avgdl: total_tokens as f64 / n as f64,
        },
        meta,
        vocab: terms.vocab,
        term_ids,
        postings: terms.postings,
        cf: terms.cf,
        passage_ids: ids.passage_ids,
        doc_ids: ids.doc_ids,
        genres: ids.genres,
        lengths: ids.lengths,
        forward,
    })
}
