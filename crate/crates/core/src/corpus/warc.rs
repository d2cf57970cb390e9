//! Streaming WARC 1.0/1.1 reader.
//!
//! Accepts plain archives and gzip archives with one member per record.
//! Malformed record headers are reported per record and the reader
//! resynchronizes on the next `WARC/` version line; a stream that ends inside
//! a record block is a terminal error.

use std::io::{self, BufRead, BufReader, Read};

use chrono::{DateTime, Utc};
use flate2::read::MultiGzDecoder;
use thiserror::Error;
use url::Url;

use super::PageRecord;

#[derive(Debug, Error)]
pub enum WarcError {
    #[error("record {record}: malformed WARC header: {reason}")]
    MalformedHeader { record: usize, reason: String },

    #[error("record {record}: {reason}")]
    MalformedRecord { record: usize, reason: String },

    #[error("record {record}: stream truncated ({reason})")]
    Truncated { record: usize, reason: String },

    #[error("read error: {0}")]
    Io(#[from] io::Error),
}

impl WarcError {
    /// Terminal errors end iteration; the rest skip a single record.
    pub fn is_terminal(&self) -> bool {
        matches!(self, WarcError::Truncated { .. } | WarcError::Io(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarcRecord {
    pub version: String,
    pub headers: Vec<(String, String)>,
    pub block: Vec<u8>,
}

impl WarcRecord {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

pub struct WarcReader<'a> {
    input: Box<dyn BufRead + 'a>,
    pending_line: Option<String>,
    record: usize,
    done: bool,
}

impl<'a> WarcReader<'a> {
    pub fn new<R: Read + 'a>(reader: R) -> io::Result<Self> {
        let mut buffered = BufReader::new(reader);
        let gzip = buffered.fill_buf()?.starts_with(&[0x1f, 0x8b]);
        let input: Box<dyn BufRead + 'a> = if gzip {
            Box::new(BufReader::new(MultiGzDecoder::new(buffered)))
        } else {
            Box::new(buffered)
        };
        Ok(WarcReader {
            input,
            pending_line: None,
            record: 0,
            done: false,
        })
    }

    /// Reads one line including its terminator; `None` at end of stream.
    fn read_line(&mut self) -> Result<Option<String>, WarcError> {
        if let Some(line) = self.pending_line.take() {
            return Ok(Some(line));
        }
        let mut buf = Vec::new();
        match self.input.read_until(b'\n', &mut buf) {
            Ok(0) => Ok(None),
            Ok(_) => Ok(Some(String::from_utf8_lossy(&buf).into_owned())),
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Err(self.truncated("gzip member ends early")),
            Err(e) => Err(WarcError::Io(e)),
        }
    }

    fn truncated(&self, reason: &str) -> WarcError {
        WarcError::Truncated {
            record: self.record,
            reason: reason.to_owned(),
        }
    }

    /// Skips lines until the next version line, which is kept for the next call.
    fn resync(&mut self) -> Result<(), WarcError> {
        while let Some(line) = self.read_line()? {
            if line.starts_with("WARC/") {
                self.pending_line = Some(line);
                break;
            }
        }
        Ok(())
    }

    fn malformed(&mut self, reason: String) -> WarcError {
        let err = WarcError::MalformedHeader {
            record: self.record,
            reason,
        };
        if let Err(e) = self.resync() {
            self.done = true;
            return e;
        }
        err
    }

    fn next_record(&mut self) -> Result<Option<WarcRecord>, WarcError> {
        let version_line = loop {
            match self.read_line()? {
                None => return Ok(None),
                Some(line) if line.trim().is_empty() => continue,
                Some(line) => break line,
            }
        };
        self.record += 1;
        let version = version_line.trim_end().to_owned();
        if !version.starts_with("WARC/") {
            return Err(self.malformed(format!("expected version line, found `{}`", truncate(&version))));
        }

        let mut headers = Vec::new();
        loop {
            let Some(line) = self.read_line()? else {
                return Err(self.truncated("end of stream inside header"));
            };
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() {
                break;
            }
            if line.starts_with([' ', '\t']) {
                // folded continuation line
                if let Some((_, value)) = headers.last_mut() {
                    let value: &mut String = value;
                    value.push(' ');
                    value.push_str(line.trim());
                    continue;
                }
            }
            match line.split_once(':') {
                Some((name, value)) if !name.trim().is_empty() => {
                    headers.push((name.trim().to_owned(), value.trim().to_owned()))
                }
                _ => return Err(self.malformed(format!("bad header line `{}`", truncate(line)))),
            }
        }

        let length = headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case("Content-Length"))
            .map(|(_, v)| v.clone());
        let length: usize = match length.as_deref().map(str::parse) {
            Some(Ok(n)) => n,
            Some(Err(_)) => return Err(self.malformed(format!("invalid Content-Length `{}`", length.unwrap()))),
            None => return Err(self.malformed("missing Content-Length".into())),
        };

        let mut block = vec![0u8; length];
        let mut filled = 0;
        while filled < length {
            match self.input.read(&mut block[filled..]) {
                Ok(0) => return Err(self.truncated(&format!("block has {filled} of {length} bytes"))),
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                    return Err(self.truncated(&format!("block has {filled} of {length} bytes")))
                }
                Err(e) => return Err(WarcError::Io(e)),
            }
        }

        Ok(Some(WarcRecord {
            version,
            headers,
            block,
        }))
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(60).collect()
}

impl Iterator for WarcReader<'_> {
    type Item = Result<WarcRecord, WarcError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_record() {
            Ok(Some(rec)) => Some(Ok(rec)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                if e.is_terminal() {
                    self.done = true;
                }
                Some(Err(e))
            }
        }
    }
}

/// HTML pages from the `response` records of a WARC stream, in record order.
pub struct PageIter<'a> {
    records: WarcReader<'a>,
}

/// Reads a WARC stream and yields one [`PageRecord`] per HTML response.
pub fn read_warc<'a, R: Read + 'a>(reader: R) -> io::Result<PageIter<'a>> {
    Ok(PageIter {
        records: WarcReader::new(reader)?,
    })
}

impl Iterator for PageIter<'_> {
    type Item = Result<PageRecord, WarcError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let record = match self.records.next()? {
                Ok(r) => r,
                Err(e) => return Some(Err(e)),
            };
            let index = self.records.record;
            match page_from_record(&record, index) {
                Ok(Some(page)) => return Some(Ok(page)),
                Ok(None) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

fn page_from_record(record: &WarcRecord, index: usize) -> Result<Option<PageRecord>, WarcError> {
    if !record
        .header("WARC-Type")
        .is_some_and(|t| t.eq_ignore_ascii_case("response"))
    {
        return Ok(None);
    }
    let bad = |reason: String| WarcError::MalformedRecord { record: index, reason };

    let Some(http) = HttpResponse::parse(&record.block) else {
        return Err(bad("response block is not an HTTP message".into()));
    };
    let is_html = http.header("Content-Type").is_some_and(|ct| {
        let ct = ct.to_ascii_lowercase();
        ct.contains("text/html") || ct.contains("application/xhtml")
    });
    if !is_html {
        return Ok(None);
    }

    let uri = record
        .header("WARC-Target-URI")
        .ok_or_else(|| bad("missing WARC-Target-URI".into()))?;
    let uri = uri.trim_start_matches('<').trim_end_matches('>');
    let url = Url::parse(uri).map_err(|e| bad(format!("invalid target URI `{uri}`: {e}")))?;
    let date = record.header("WARC-Date").ok_or_else(|| bad("missing WARC-Date".into()))?;
    let fetch_time = DateTime::parse_from_rfc3339(date)
        .map_err(|e| bad(format!("invalid WARC-Date `{date}`: {e}")))?
        .with_timezone(&Utc);

    let mut body = http.body.to_vec();
    if http
        .header("Transfer-Encoding")
        .is_some_and(|v| v.to_ascii_lowercase().contains("chunked"))
    {
        body = dechunk(&body).ok_or_else(|| bad("invalid chunked transfer encoding".into()))?;
    }
    if http
        .header("Content-Encoding")
        .is_some_and(|v| v.to_ascii_lowercase().contains("gzip"))
    {
        let mut decoded = Vec::new();
        MultiGzDecoder::new(&body[..])
            .read_to_end(&mut decoded)
            .map_err(|e| bad(format!("gzip content encoding: {e}")))?;
        body = decoded;
    }

    let html = match String::from_utf8(body) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("{url}: body is not valid UTF-8, decoding lossily");
            String::from_utf8_lossy(e.as_bytes()).into_owned()
        }
    };
    if html.trim().is_empty() {
        log::warn!("{url}: empty HTML body skipped");
        return Ok(None);
    }
    Ok(Some(PageRecord { url, fetch_time, html }))
}

struct HttpResponse<'a> {
    headers: Vec<(String, String)>,
    body: &'a [u8],
}

impl<'a> HttpResponse<'a> {
    fn parse(block: &'a [u8]) -> Option<Self> {
        let (head_end, body_start) = find_subslice(block, b"\r\n\r\n")
            .map(|i| (i, i + 4))
            .or_else(|| find_subslice(block, b"\n\n").map(|i| (i, i + 2)))
            .unwrap_or((block.len(), block.len()));
        let head = String::from_utf8_lossy(&block[..head_end]);
        let mut lines = head.lines();
        let status = lines.next()?;
        if !status.starts_with("HTTP/") {
            return None;
        }
        let headers = lines
            .filter_map(|l| l.split_once(':'))
            .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
            .collect();
        Some(HttpResponse {
            headers,
            body: &block[body_start..],
        })
    }

    fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

fn dechunk(mut data: &[u8]) -> Option<Vec<u8>> {
    let mut out = Vec::new();
    loop {
        let line_end = find_subslice(data, b"\r\n")?;
        let size_field = std::str::from_utf8(&data[..line_end]).ok()?;
        let size_hex = size_field.split(';').next()?.trim();
        let size = usize::from_str_radix(size_hex, 16).ok()?;
        data = &data[line_end + 2..];
        if size == 0 {
            return Some(out);
        }
        if data.len() < size {
            return None;
        }
        out.extend_from_slice(&data[..size]);
        data = data.get(size + 2..).unwrap_or(&[]);
    }
}
