//! Event records, sensor geometry, time windows, and the two on-disk
//! interchange formats.
//!
//! CSV: optional `x,y,t,p` header, one event per line, optional fifth
//! `label` column (`1` = signal, `0` = noise).
//!
//! Binary (`.evj`), little-endian:
//!
//! ```text
//! b"EVJ1" | u32 width | u32 height | u64 count |
//! count x { f64 x | f64 y | f64 t | i8 p | u8 label (255 = unlabeled) }
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"EVJ1";
const UNLABELED: u8 = 255;

/// A single brightness-change event. Coordinates are real-valued so the same
/// type can carry raw and motion-compensated positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub polarity: i8,
}

impl Event {
    pub fn new(x: f64, y: f64, t: f64, polarity: i8) -> Result<Self> {
        let event = Event { x, y, t, polarity };
        event.validate()?;
        Ok(event)
    }

    pub fn validate(&self) -> Result<()> {
        if self.polarity != 1 && self.polarity != -1 {
            return Err(Error::InvalidEvent(format!(
                "polarity must be -1 or 1, got {}",
                self.polarity
            )));
        }
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(Error::InvalidEvent(format!(
                "non-finite position ({}, {})",
                self.x, self.y
            )));
        }
        if !self.t.is_finite() || self.t < 0.0 {
            return Err(Error::InvalidEvent(format!(
                "timestamp must be finite and non-negative, got {}",
                self.t
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub width: usize,
    pub height: usize,
}

impl SensorGeometry {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig(format!(
                "sensor geometry must be at least 1x1, got {width}x{height}"
            )));
        }
        Ok(SensorGeometry { width, height })
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Row-major index of the cell containing `(x, y)`, if inside the sensor.
    #[inline]
    pub fn cell_of(&self, x: f64, y: f64) -> Option<usize> {
        if !(x >= 0.0 && y >= 0.0) {
            return None;
        }
        let (j, i) = (x.floor() as usize, y.floor() as usize);
        (j < self.width && i < self.height).then(|| i * self.width + j)
    }

    /// Smallest geometry containing every event.
    pub fn bounding(events: &[Event]) -> Self {
        let w = events.iter().map(|e| e.x.floor() as usize + 1).max().unwrap_or(1);
        let h = events.iter().map(|e| e.y.floor() as usize + 1).max().unwrap_or(1);
        SensorGeometry {
            width: w.max(1),
            height: h.max(1),
        }
    }
}

/// Per-event ground-truth or predicted signal flags, parallel to an event list.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventLabels(pub Vec<bool>);

impl EventLabels {
    pub fn all(len: usize, is_signal: bool) -> Self {
        EventLabels(vec![is_signal; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_signal(&self, k: usize) -> bool {
        self.0[k]
    }

    pub fn signal_count(&self) -> usize {
        self.0.iter().filter(|&&s| s).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }
}

/// A time-bounded slice of a stream, the unit every optimizer works on.
#[derive(Debug, Clone, PartialEq)]
pub struct EventWindow {
    events: Vec<Event>,
    geometry: SensorGeometry,
    t_start: f64,
    t_end: f64,
    t_ref: f64,
}

impl EventWindow {
    pub fn new(
        events: Vec<Event>,
        geometry: SensorGeometry,
        t_start: f64,
        t_end: f64,
        t_ref: f64,
    ) -> Result<Self> {
        if !(t_start <= t_ref && t_ref <= t_end) {
            return Err(Error::InvalidWindow(format!(
                "need t_start <= t_ref <= t_end, got {t_start}, {t_ref}, {t_end}"
            )));
        }
        for (k, pair) in events.windows(2).enumerate() {
            if pair[1].t < pair[0].t {
                return Err(Error::InvalidWindow(format!(
                    "events not sorted by time at index {}",
                    k + 1
                )));
            }
        }
        if let (Some(first), Some(last)) = (events.first(), events.last()) {
            if first.t < t_start || last.t > t_end {
                return Err(Error::InvalidWindow(format!(
                    "events span [{}, {}] outside window [{t_start}, {t_end}]",
                    first.t, last.t
                )));
            }
        }
        Ok(EventWindow {
            events,
            geometry,
            t_start,
            t_end,
            t_ref,
        })
    }

    /// Window covering exactly the span of `events`, referenced at its midpoint.
    pub fn spanning(events: Vec<Event>, geometry: SensorGeometry) -> Result<Self> {
        let t_start = events.first().map_or(0.0, |e| e.t);
        let t_end = events.last().map_or(0.0, |e| e.t);
        Self::new(events, geometry, t_start, t_end, midpoint(t_start, t_end))
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn geometry(&self) -> SensorGeometry {
        self.geometry
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn t_ref(&self) -> f64 {
        self.t_ref
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Raw (unwarped) positions.
    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.events.iter().map(|e| [e.x, e.y]).collect()
    }

    /// Sub-window keeping only events whose flag is set; time bounds are kept.
    pub fn select(&self, keep: &EventLabels) -> Result<Self> {
        if keep.len() != self.events.len() {
            return Err(Error::LengthMismatch {
                left: self.events.len(),
                right: keep.len(),
            });
        }
        let events = self
            .events
            .iter()
            .zip(keep.iter())
            .filter_map(|(e, k)| k.then_some(*e))
            .collect();
        Ok(EventWindow {
            events,
            geometry: self.geometry,
            t_start: self.t_start,
            t_end: self.t_end,
            t_ref: self.t_ref,
        })
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    a + 0.5 * (b - a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WindowPolicy {
    /// Consecutive windows of `seconds` each, anchored at the first event.
    FixedDuration(f64),
    /// Consecutive windows of this many events.
    FixedCount(usize),
}

/// Partition a time-sorted stream into non-overlapping windows, each
/// referenced at its midpoint. Empty windows are skipped; the final partial
/// window is kept.
pub fn window_stream(
    events: &[Event],
    geometry: SensorGeometry,
    policy: WindowPolicy,
) -> Result<Vec<EventWindow>> {
    if events.is_empty() {
        return Ok(Vec::new());
    }
    let mut windows = Vec::new();
    match policy {
        WindowPolicy::FixedDuration(dt) => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "window duration must be positive, got {dt}"
                )));
            }
            let origin = events[0].t;
            let mut start = 0;
            while start < events.len() {
                let slot = ((events[start].t - origin) / dt).floor();
                let (lo, hi) = (origin + slot * dt, origin + (slot + 1.0) * dt);
                let end = start + events[start..].partition_point(|e| e.t < hi);
                let chunk = events[start..end].to_vec();
                windows.push(EventWindow::new(chunk, geometry, lo, hi, midpoint(lo, hi))?);
                start = end;
            }
        }
        WindowPolicy::FixedCount(n) => {
            if n == 0 {
                return Err(Error::InvalidConfig("window count must be positive".into()));
            }
            for chunk in events.chunks(n) {
                windows.push(EventWindow::spanning(chunk.to_vec(), geometry)?);
            }
        }
    }
    Ok(windows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventFormat {
    Csv,
    Binary,
}

impl EventFormat {
    /// `.csv`/`.txt` are CSV; anything else is the binary format.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") || ext.eq_ignore_ascii_case("txt") => {
                EventFormat::Csv
            }
            _ => EventFormat::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    /// Stable-sort by timestamp instead of rejecting out-of-order files.
    pub sort: bool,
}

/// Contents of an event file. Geometry is only stored by the binary format.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    pub events: Vec<Event>,
    pub labels: Option<EventLabels>,
    pub geometry: Option<SensorGeometry>,
}

impl EventStream {
    pub fn geometry_or_bounding(&self) -> SensorGeometry {
        self.geometry
            .unwrap_or_else(|| SensorGeometry::bounding(&self.events))
    }
}

pub fn read_events(path: &Path, format: EventFormat, opts: ReadOptions) -> Result<EventStream> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut stream = match format {
        EventFormat::Csv => read_csv(reader, path)?,
        EventFormat::Binary => read_binary(reader, path)?,
    };
    order_by_time(&mut stream, opts.sort)?;
    Ok(stream)
}

fn order_by_time(stream: &mut EventStream, sort: bool) -> Result<()> {
    let first_bad = stream.events.windows(2).position(|p| p[1].t < p[0].t);
    let Some(bad) = first_bad else {
        return Ok(());
    };
    if !sort {
        return Err(Error::NonMonotone {
            index: bad + 1,
            prev: stream.events[bad].t,
            next: stream.events[bad + 1].t,
        });
    }
    let mut order: Vec<usize> = (0..stream.events.len()).collect();
    order.sort_by(|&a, &b| stream.events[a].t.total_cmp(&stream.events[b].t));
    stream.events = order.iter().map(|&k| stream.events[k]).collect();
    if let Some(labels) = &stream.labels {
        stream.labels = Some(EventLabels(order.iter().map(|&k| labels.0[k]).collect()));
    }
    Ok(())
}

fn read_csv(reader: impl BufRead, path: &Path) -> Result<EventStream> {
    let mut events = Vec::new();
    let mut labels: Vec<bool> = Vec::new();
    let mut labeled: Option<bool> = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if events.is_empty() && line.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            // header
            continue;
        }
        let malformed = |reason: String| Error::Malformed {
            line: lineno,
            reason,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 && fields.len() != 5 {
            return Err(malformed(format!(
                "expected 4 or 5 fields, found {}",
                fields.len()
            )));
        }
        let num = |s: &str, name: &str| {
            s.parse::<f64>()
                .map_err(|_| malformed(format!("cannot parse {name} from {s:?}")))
        };
        let (x, y, t) = (num(fields[0], "x")?, num(fields[1], "y")?, num(fields[2], "t")?);
        let p: i8 = fields[3]
            .parse()
            .map_err(|_| malformed(format!("cannot parse polarity from {:?}", fields[3])))?;
        let event = Event::new(x, y, t, p).map_err(|e| malformed(e.to_string()))?;

        let has_label = fields.len() == 5;
        match labeled {
            None => labeled = Some(has_label),
            Some(prev) if prev != has_label => {
                return Err(malformed("label column present on some lines only".into()))
            }
            _ => {}
        }
        if has_label {
            labels.push(match fields[4] {
                "1" => true,
                "0" => false,
                other => return Err(malformed(format!("label must be 0 or 1, got {other:?}"))),
            });
        }
        events.push(event);
    }

    Ok(EventStream {
        events,
        labels: (labeled == Some(true)).then_some(EventLabels(labels)),
        geometry: None,
    })
}

fn read_binary(mut reader: impl Read, path: &Path) -> Result<EventStream> {
    let io = |e| Error::io(path, e);
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::Malformed {
            line: 0,
            reason: format!("bad magic {magic:?}, expected EVJ1"),
        });
    }
    let mut header = [0u8; 16];
    reader.read_exact(&mut header).map_err(io)?;
    let width = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let geometry = SensorGeometry::new(width, height).map_err(|e| Error::Malformed {
        line: 0,
        reason: e.to_string(),
    })?;

    let mut events = Vec::with_capacity(count.min(1 << 24));
    let mut labels = Vec::with_capacity(count.min(1 << 24));
    let mut any_label = false;
    let mut record = [0u8; 26];
    for k in 0..count {
        reader.read_exact(&mut record).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::Malformed {
                    line: k + 1,
                    reason: format!("file truncated after {k} of {count} records"),
                }
            } else {
                io(e)
            }
        })?;
        let f = |o: usize| f64::from_le_bytes(record[o..o + 8].try_into().unwrap());
        let event = Event::new(f(0), f(8), f(16), record[24] as i8).map_err(|e| {
            Error::Malformed {
                line: k + 1,
                reason: e.to_string(),
            }
        })?;
        let label = match record[25] {
            0 => Some(false),
            1 => Some(true),
            UNLABELED => None,
            other => {
                return Err(Error::Malformed {
                    line: k + 1,
                    reason: format!("label byte must be 0, 1 or 255, got {other}"),
                })
            }
        };
        any_label |= label.is_some();
        labels.push(label);
        events.push(event);
    }

    let labels = if any_label {
        if labels.iter().any(Option::is_none) {
            return Err(Error::Malformed {
                line: 0,
                reason: "label byte present on some records only".into(),
            });
        }
        Some(EventLabels(labels.into_iter().map(Option::unwrap).collect()))
    } else {
        None
    };
    Ok(EventStream {
        events,
        labels,
        geometry: Some(geometry),
    })
}

/// Write events (and optional parallel labels). `geometry` is stored by the
/// binary format and ignored for CSV.
pub fn write_events(
    path: &Path,
    format: EventFormat,
    events: &[Event],
    labels: Option<&EventLabels>,
    geometry: SensorGeometry,
) -> Result<()> {
    if let Some(labels) = labels {
        if labels.len() != events.len() {
            return Err(Error::LengthMismatch {
                left: events.len(),
                right: labels.len(),
            });
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    match format {
        EventFormat::Csv => {
            let header = if labels.is_some() { "x,y,t,p,label" } else { "x,y,t,p" };
            writeln!(out, "{header}").map_err(io)?;
            for (k, e) in events.iter().enumerate() {
                // `{}` on f64 prints the shortest exactly round-tripping form.
                write!(out, "{},{},{},{}", e.x, e.y, e.t, e.polarity).map_err(io)?;
                if let Some(labels) = labels {
                    write!(out, ",{}", u8::from(labels.is_signal(k))).map_err(io)?;
                }
                writeln!(out).map_err(io)?;
            }
        }
        EventFormat::Binary => {
            out.write_all(MAGIC).map_err(io)?;
            out.write_all(&(geometry.width as u32).to_le_bytes()).map_err(io)?;
            out.write_all(&(geometry.height as u32).to_le_bytes()).map_err(io)?;
            out.write_all(&(events.len() as u64).to_le_bytes()).map_err(io)?;
            for (k, e) in events.iter().enumerate() {
                let mut record = [0u8; 26];
                record[0..8].copy_from_slice(&e.x.to_le_bytes());
                record[8..16].copy_from_slice(&e.y.to_le_bytes());
                record[16..24].copy_from_slice(&e.t.to_le_bytes());
                record[24] = e.polarity as u8;
                record[25] = labels.map_or(UNLABELED, |l| u8::from(l.is_signal(k)));
                out.write_all(&record).map_err(io)?;
            }
        }
    }
    out.flush().map_err(io)
}
