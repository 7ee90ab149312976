//! Datasets on disk.
//!
//! Layout: `root/{train,test}/{class}/{video}/frame_*.pgm` (binary P5
//! frames, read in lexicographic filename order) or
//! `root/{train,test}/{class}/{video}.vidf`.
//!
//! VIDF: magic `VIDF`, u32 version = 1, u32 n_frames, u32 height, u32 width,
//! then little-endian f32 pixels, frame-major, rows top to bottom.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_u32, to_u32, write_u32};
use crate::video::{Frame, VideoTensor};

const VIDF_MAGIC: &[u8; 4] = b"VIDF";
const VIDF_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn dir_name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVideo {
    pub video: VideoTensor,
    pub class_id: usize,
    pub split: Split,
    /// File or directory stem inside the class folder.
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub classes: Vec<String>,
    pub videos: Vec<LabeledVideo>,
}

impl Dataset {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &LabeledVideo> {
        self.videos.iter().filter(move |v| v.split == split)
    }

    /// Class ids dense, every class with a training video.
    pub fn validate(&self) -> Result<()> {
        let c = self.num_classes();
        if c == 0 {
            return Err(Error::invalid("dataset has no classes"));
        }
        if let Some(v) = self.videos.iter().find(|v| v.class_id >= c) {
            return Err(Error::invalid(format!("video {} has class {} >= {c}", v.name, v.class_id)));
        }
        for (id, name) in self.classes.iter().enumerate() {
            if !self.split(Split::Train).any(|v| v.class_id == id) {
                return Err(Error::invalid(format!("class {name} has no training video")));
            }
        }
        Ok(())
    }

    /// Write every video as VIDF under `root`.
    pub fn write_vidf(&self, root: impl AsRef<Path>) -> Result<()> {
        let root = root.as_ref();
        for v in &self.videos {
            let dir = root.join(v.split.dir_name()).join(&self.classes[v.class_id]);
            fs::create_dir_all(&dir).map_err(|e| Error::from(e).at(&dir))?;
            write_vidf_file(dir.join(format!("{}.vidf", v.name)), &v.video)?;
        }
        Ok(())
    }
}

pub fn write_vidf<W: Write>(w: &mut W, video: &VideoTensor) -> Result<()> {
    w.write_all(VIDF_MAGIC)?;
    write_u32(w, VIDF_VERSION)?;
    write_u32(w, to_u32(video.len(), "frame count")?)?;
    write_u32(w, to_u32(video.height(), "height")?)?;
    write_u32(w, to_u32(video.width(), "width")?)?;
    for f in video.frames() {
        for &p in f.pixels() {
            w.write_all(&p.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_vidf<R: Read>(r: &mut R, id: &str, class_label: Option<usize>) -> Result<VideoTensor> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != VIDF_MAGIC {
        return Err(Error::format("VIDF", "bad magic"));
    }
    let version = read_u32(r)?;
    if version != VIDF_VERSION {
        return Err(Error::format("VIDF", format!("unsupported version {version}")));
    }
    let n = read_u32(r)? as usize;
    let h = read_u32(r)? as usize;
    let w = read_u32(r)? as usize;
    let mut buf = vec![0u8; w * h * 4];
    let mut frames = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        let pixels = buf
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        frames.push(Frame::new(w, h, pixels)?);
    }
    VideoTensor::new(id, frames, class_label)
}

pub fn write_vidf_file(path: impl AsRef<Path>, video: &VideoTensor) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::from(e).at(path))?);
    write_vidf(&mut w, video)?;
    w.flush()?;
    Ok(())
}

pub fn read_vidf_file(path: impl AsRef<Path>, id: &str, class_label: Option<usize>) -> Result<VideoTensor> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::from(e).at(path))?;
    read_vidf(&mut BufReader::new(f), id, class_label).map_err(|e| e.at(path))
}

/// Parse a binary (P5) PGM image; samples are scaled to `[0, 1]`.
pub fn read_pgm(bytes: &[u8]) -> Result<Frame> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format("PGM", "truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(Error::format("PGM", "only binary P5 images are supported"));
    }
    let mut num = |what: &str| -> Result<usize> {
        token()?
            .parse()
            .map_err(|_| Error::format("PGM", format!("bad {what}")))
    };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format("PGM", format!("maxval {maxval} out of range")));
    }
    // exactly one whitespace byte separates header and raster
    let data = &bytes[(pos + 1).min(bytes.len())..];
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    if data.len() < width * height * sample_bytes {
        return Err(Error::format("PGM", "truncated raster"));
    }
    let scale = 1.0 / maxval as f32;
    let pixels = (0..width * height)
        .map(|i| {
            let v = if sample_bytes == 1 {
                data[i] as u32
            } else {
                u16::from_be_bytes([data[2 * i], data[2 * i + 1]]) as u32
            };
            v as f32 * scale
        })
        .collect();
    Frame::new(width, height, pixels)
}

/// Encode a frame as 8-bit P5 PGM, clamping to `[0, 1]`.
pub fn write_pgm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend(
        frame
            .pixels()
            .iter()
            .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

fn sorted_entries(dir: &Path) -> Result<Vec<fs::DirEntry>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::from(e).at(dir))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::from(e).at(dir))?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

fn load_frame_dir(dir: &Path, id: &str, class_id: usize) -> Result<VideoTensor> {
    let mut frames = Vec::new();
    for e in sorted_entries(dir)? {
        let path = e.path();
        if path.extension().is_some_and(|x| x == "pgm") {
            let bytes = fs::read(&path).map_err(|e| Error::from(e).at(&path))?;
            frames.push(read_pgm(&bytes).map_err(|e| e.at(&path))?);
        }
    }
    VideoTensor::new(id, frames, Some(class_id)).map_err(|e| e.at(dir))
}

/// Load a dataset laid out as described in the module docs.
pub fn ingest(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref();
    let mut class_names = std::collections::BTreeSet::new();
    for split in [Split::Train, Split::Test] {
        let dir = root.join(split.dir_name());
        if !dir.is_dir() {
            continue;
        }
        for e in sorted_entries(&dir)? {
            if e.path().is_dir() {
                class_names.insert(e.file_name().to_string_lossy().into_owned());
            }
        }
    }
    let classes: Vec<String> = class_names.into_iter().collect();
    let mut videos = Vec::new();
    for split in [Split::Train, Split::Test] {
        for (class_id, class) in classes.iter().enumerate() {
            let dir = root.join(split.dir_name()).join(class);
            if !dir.is_dir() {
                continue;
            }
            for e in sorted_entries(&dir)? {
                let path = e.path();
                let file_name = e.file_name().to_string_lossy().into_owned();
                let (name, video) = if path.is_dir() {
                    let id = format!("{}/{class}/{file_name}", split.dir_name());
                    (file_name, load_frame_dir(&path, &id, class_id)?)
                } else if path.extension().is_some_and(|x| x == "vidf") {
                    let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
                    let id = format!("{}/{class}/{stem}", split.dir_name());
                    (stem, read_vidf_file(&path, &id, Some(class_id))?)
                } else {
                    continue;
                };
                videos.push(LabeledVideo {
                    video,
                    class_id,
                    split,
                    name,
                });
            }
        }
    }
    for (id, class) in classes.iter().enumerate() {
        if !videos.iter().any(|v| v.class_id == id) {
            return Err(Error::invalid(format!("class {class} has no videos")).at(root));
        }
    }
    let ds = Dataset { classes, videos };
    ds.validate().map_err(|e| e.at(root))?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_video(id: &str, n: usize) -> VideoTensor {
        let frames = (0..n)
            .map(|k| Frame::from_fn(4, 4, |x, y| (x + 2 * y + k) as f32 * 0.25))
            .collect();
        VideoTensor::new(id, frames, None).unwrap()
    }

    #[test]
    fn vidf_header_and_round_trip() {
        let v = tiny_video("a", 5);
        let mut buf = Vec::new();
        write_vidf(&mut buf, &v).unwrap();
        assert_eq!(&buf[..4], b"VIDF");
        assert_eq!(buf.len(), 20 + 5 * 16 * 4);
        let back = read_vidf(&mut buf.as_slice(), "a", None).unwrap();
        assert_eq!(back.len(), 5);
        assert_eq!((back.width(), back.height()), (4, 4));
        assert_eq!(back, v);
    }

    #[test]
    fn pgm_round_trip_and_comments() {
        let f = Frame::from_fn(3, 2, |x, y| ((x + y) * 51) as f32 / 255.0);
        let bytes = write_pgm(&f);
        let back = read_pgm(&bytes).unwrap();
        assert_eq!((back.width(), back.height()), (3, 2));
        for (a, b) in back.pixels().iter().zip(f.pixels()) {
            assert!((a - b).abs() < 1e-6);
        }
        let commented = b"P5\n# made by hand\n2 1\n255\n\x00\xff";
        let g = read_pgm(commented).unwrap();
        assert_eq!(g.pixels(), &[0.0, 1.0]);
        assert!(read_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(read_pgm(b"P5\n2 2\n255\n\x00").is_err());
    }

    #[test]
    fn sixteen_bit_pgm() {
        let g = read_pgm(b"P5 1 1 1000 \x01\xf4").unwrap();
        assert!((g.pixels()[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn ingest_two_classes_with_frame_dirs() {
        let tmp = tempfile::tempdir().unwrap();
        for (class, k) in [("wave", 0usize), ("jump", 1)] {
            let dir = tmp.path().join("train").join(class).join("v0");
            fs::create_dir_all(&dir).unwrap();
            // written out of order; names decide the order
            for i in [2usize, 0, 1] {
                let f = Frame::filled(4, 3, ((i + k) as f32) / 10.0);
                fs::write(dir.join(format!("frame_{i:05}.pgm")), write_pgm(&f)).unwrap();
            }
        }
        let ds = ingest(tmp.path()).unwrap();
        assert_eq!(ds.classes, vec!["jump", "wave"]);
        assert_eq!(ds.videos.len(), 2);
        let wave = &ds.videos[1];
        assert_eq!(wave.class_id, 1);
        let firsts: Vec<f32> = wave.video.frames().iter().map(|f| f.get(0, 0)).collect();
        for (got, want) in firsts.iter().zip([0.0f32, 0.1, 0.2]) {
            assert!((got - want).abs() < 0.5 / 255.0 + 1e-6);
        }
    }

    #[test]
    fn ingest_rejects_mixed_sizes() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("train").join("a").join("v0");
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("frame_00000.pgm"), write_pgm(&Frame::filled(4, 4, 0.0))).unwrap();
        fs::write(dir.join("frame_00001.pgm"), write_pgm(&Frame::filled(5, 4, 0.0))).unwrap();
        let err = ingest(tmp.path()).unwrap_err();
        assert!(err.to_string().contains("v0"), "{err}");
    }

    #[test]
    fn ingest_rejects_empty_class() {
        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir_all(tmp.path().join("train").join("empty")).unwrap();
        let dir = tmp.path().join("train").join("full");
        fs::create_dir_all(&dir).unwrap();
        write_vidf_file(dir.join("v.vidf"), &tiny_video("v", 2)).unwrap();
        assert!(ingest(tmp.path()).is_err());
    }
}
