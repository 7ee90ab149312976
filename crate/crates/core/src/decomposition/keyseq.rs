//! Key-sequence sets and their `KSEQ` container.
//!
//! Layout: magic `KSEQ`, u32 version = 1, u32 K, u32 t, K u32 centre indices,
//! K cuboid-descriptor matrices in the `MATX` format, then the reference
//! class (u32, `0xFFFFFFFF` when absent) and the source video id (u32 byte
//! length followed by UTF-8 bytes). Frames are not stored.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::io::{read_matrix, read_u32, to_u32, write_matrix, write_u32};
use crate::video::Frame;

const MAGIC: &[u8; 4] = b"KSEQ";
const VERSION: u32 = 1;
const ABSENT: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct KeySequence {
    pub key_frame_index: usize,
    /// The `2t + 1` window frames; empty when loaded from disk.
    pub frames: Vec<Frame>,
    /// `delta x n'` filtered, normalised cuboid descriptors.
    pub cuboid_descriptors: DMatrix<f64>,
}

/// The K key-sequences of one video, decomposed against one reference class.
#[derive(Debug, Clone, PartialEq)]
pub struct KeySequenceSet {
    pub sequences: Vec<KeySequence>,
    pub t: usize,
    pub source_video: String,
    pub reference_class: Option<usize>,
}

impl KeySequenceSet {
    pub fn k(&self) -> usize {
        self.sequences.len()
    }

    pub fn centers(&self) -> Vec<usize> {
        self.sequences.iter().map(|s| s.key_frame_index).collect()
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        write_u32(w, VERSION)?;
        write_u32(w, to_u32(self.k(), "K")?)?;
        write_u32(w, to_u32(self.t, "t")?)?;
        for s in &self.sequences {
            write_u32(w, to_u32(s.key_frame_index, "key-frame index")?)?;
        }
        for s in &self.sequences {
            write_matrix(w, &s.cuboid_descriptors)?;
        }
        let class = match self.reference_class {
            Some(c) => to_u32(c, "reference class")?,
            None => ABSENT,
        };
        write_u32(w, class)?;
        write_u32(w, to_u32(self.source_video.len(), "id length")?)?;
        w.write_all(self.source_video.as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::format("KSEQ", "bad magic"));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::format("KSEQ", format!("unsupported version {version}")));
        }
        let k = read_u32(r)? as usize;
        let t = read_u32(r)? as usize;
        let centers = (0..k)
            .map(|_| read_u32(r).map(|c| c as usize))
            .collect::<Result<Vec<_>>>()?;
        let mut sequences = Vec::with_capacity(k);
        for c in centers {
            sequences.push(KeySequence {
                key_frame_index: c,
                frames: Vec::new(),
                cuboid_descriptors: read_matrix(r)?,
            });
        }
        let class = read_u32(r)?;
        let len = read_u32(r)? as usize;
        let mut id = vec![0u8; len];
        r.read_exact(&mut id)?;
        let source_video =
            String::from_utf8(id).map_err(|_| Error::format("KSEQ", "video id is not UTF-8"))?;
        Ok(Self {
            sequences,
            t,
            source_video,
            reference_class: (class != ABSENT).then_some(class as usize),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = BufWriter::new(File::create(path).map_err(|e| Error::from(e).at(path))?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::from(e).at(path))?;
        Self::read_from(&mut BufReader::new(f)).map_err(|e| e.at(path))
    }

    /// Copy without frames, as it would come back from disk.
    pub fn without_frames(&self) -> Self {
        let mut out = self.clone();
        for s in &mut out.sequences {
            s.frames.clear();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_drops_frames_only() {
        let set = KeySequenceSet {
            sequences: vec![
                KeySequence {
                    key_frame_index: 2,
                    frames: vec![Frame::filled(2, 2, 1.0)],
                    cuboid_descriptors: DMatrix::from_fn(3, 2, |i, j| (i + j) as f64),
                },
                KeySequence {
                    key_frame_index: 9,
                    frames: vec![],
                    cuboid_descriptors: DMatrix::from_element(3, 1, 0.5),
                },
            ],
            t: 3,
            source_video: "walk/v01".into(),
            reference_class: Some(4),
        };
        let mut buf = Vec::new();
        set.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"KSEQ");
        let back = KeySequenceSet::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, set.without_frames());
    }
}
