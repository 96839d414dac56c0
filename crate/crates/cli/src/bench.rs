//! `bench`: flat key=value configuration, the four-scheme sweep and the report.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use motkip_core::codec::{KeyMaterial, Scheme, DEFAULT_MAX_FRAGMENT, MAC_HEADER_LEN};
use motkip_core::session::SessionConfig;
use motkip_core::sim::{sweep, ChannelConfig, MetricsRow, SessionMetrics, TrafficProfile, GENERATOR_NAME};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub seed: u64,
    pub key_seed: u64,
    pub msdu_octets: usize,
    pub msdu_count: u64,
    /// When set, `msdu_count` is derived as `ceil(bytes / msdu_octets)`.
    pub bytes: Option<u64>,
    pub loss_prob: f64,
    pub reorder_depth: usize,
    pub corrupt_prob: f64,
    pub mac_header_octets: usize,
    pub per_frame_fixed_octets: usize,
    pub link_rate_bits_per_sec: u64,
    pub max_fragment: usize,
    pub precompute_depth: usize,
    pub schemes: Vec<Scheme>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            key_seed: 0,
            msdu_octets: 1500,
            msdu_count: 1000,
            bytes: None,
            loss_prob: 0.0,
            reorder_depth: 0,
            corrupt_prob: 0.0,
            mac_header_octets: MAC_HEADER_LEN,
            per_frame_fixed_octets: 0,
            link_rate_bits_per_sec: 11_000_000,
            max_fragment: DEFAULT_MAX_FRAGMENT,
            precompute_depth: 0,
            schemes: Scheme::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Table1,
    Table2,
}

impl BenchConfig {
    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Table1 => Self { msdu_octets: 1500, msdu_count: 1000, ..Self::default() },
            Preset::Table2 => Self { msdu_octets: 1500, bytes: Some(5 * 1024 * 1024), precompute_depth: 16, ..Self::default() },
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
        where
            T::Err: std::error::Error + Send + Sync + 'static,
        {
            v.parse().with_context(|| format!("{key}: cannot parse {v:?}"))
        }
        match key {
            "seed" => self.seed = num(key, value)?,
            "key_seed" => self.key_seed = num(key, value)?,
            "msdu_octets" => self.msdu_octets = num(key, value)?,
            "msdu_count" => self.msdu_count = num(key, value)?,
            "bytes" => self.bytes = if value.is_empty() { None } else { Some(num(key, value)?) },
            "loss_prob" => self.loss_prob = num(key, value)?,
            "reorder_depth" => self.reorder_depth = num(key, value)?,
            "corrupt_prob" => self.corrupt_prob = num(key, value)?,
            "mac_header_octets" => self.mac_header_octets = num(key, value)?,
            "per_frame_fixed_octets" => self.per_frame_fixed_octets = num(key, value)?,
            "link_rate_bits_per_sec" => self.link_rate_bits_per_sec = num(key, value)?,
            "max_fragment" => self.max_fragment = num(key, value)?,
            "precompute_depth" => self.precompute_depth = num(key, value)?,
            "schemes" => {
                self.schemes = value
                    .split(',')
                    .map(|s| s.trim().parse::<Scheme>())
                    .collect::<std::result::Result<_, _>>()?;
                if self.schemes.is_empty() {
                    bail!("schemes: empty list");
                }
            }
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Applies a key=value file. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').with_context(|| format!("line {}: expected key=value", i + 1))?;
            self.set(k.trim(), v.trim()).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let schemes: Vec<_> = self.schemes.iter().map(|s| s.name()).collect();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k}={v}").unwrap();
        kv("seed", self.seed.to_string());
        kv("key_seed", self.key_seed.to_string());
        kv("msdu_octets", self.msdu_octets.to_string());
        kv("msdu_count", self.msdu_count.to_string());
        kv("bytes", self.bytes.map(|b| b.to_string()).unwrap_or_default());
        kv("loss_prob", self.loss_prob.to_string());
        kv("reorder_depth", self.reorder_depth.to_string());
        kv("corrupt_prob", self.corrupt_prob.to_string());
        kv("mac_header_octets", self.mac_header_octets.to_string());
        kv("per_frame_fixed_octets", self.per_frame_fixed_octets.to_string());
        kv("link_rate_bits_per_sec", self.link_rate_bits_per_sec.to_string());
        kv("max_fragment", self.max_fragment.to_string());
        kv("precompute_depth", self.precompute_depth.to_string());
        kv("schemes", schemes.join(","));
        out
    }

    pub fn resolved(mut self) -> Result<Self> {
        if self.msdu_octets == 0 {
            bail!("msdu_octets must be positive");
        }
        if let Some(b) = self.bytes {
            self.msdu_count = b.div_ceil(self.msdu_octets as u64);
        }
        if self.msdu_count == 0 {
            bail!("msdu_count must be positive");
        }
        let cfg = self.channel();
        cfg.validate()?;
        Ok(self)
    }

    pub fn channel(&self) -> ChannelConfig {
        ChannelConfig {
            seed: self.seed,
            loss_prob: self.loss_prob,
            reorder_depth: self.reorder_depth,
            corrupt_prob: self.corrupt_prob,
            mac_header_octets: self.mac_header_octets,
            per_frame_fixed_octets: self.per_frame_fixed_octets,
            link_rate_bits_per_sec: self.link_rate_bits_per_sec,
            max_fragment: self.max_fragment,
            precompute_depth: self.precompute_depth,
            session: SessionConfig::default(),
        }
    }

    pub fn profiles(&self) -> Vec<TrafficProfile> {
        self.schemes
            .iter()
            .map(|&scheme| TrafficProfile { msdu_octets: self.msdu_octets, msdu_count: self.msdu_count, scheme })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportHeader {
    pub artifact: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub generator: &'static str,
    pub config: BenchConfig,
}

/// Overhead relative to the plain row, in both ratio styles.
#[derive(Debug, Clone, Serialize)]
pub struct Derived {
    pub scheme: String,
    /// (goodput_plain - goodput) / goodput_plain, percent.
    pub goodput_degradation_pct: f64,
    /// (on_air - on_air_plain) / on_air_plain, percent.
    pub on_air_overhead_pct: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub header: ReportHeader,
    pub rows: Vec<MetricsRow>,
    pub derived: Vec<Derived>,
}

impl RunReport {
    pub fn new(config: BenchConfig, metrics: &[SessionMetrics]) -> Self {
        let rows: Vec<MetricsRow> = metrics.iter().map(SessionMetrics::row).collect();
        let plain = rows.iter().find(|r| r.scheme == Scheme::Plain.name());
        let derived = match plain {
            None => Vec::new(),
            Some(p) => rows
                .iter()
                .map(|r| Derived {
                    scheme: r.scheme.clone(),
                    goodput_degradation_pct: if p.goodput > 0.0 { (p.goodput - r.goodput) / p.goodput * 100.0 } else { 0.0 },
                    on_air_overhead_pct: (r.on_air_octets as f64 - p.on_air_octets as f64) / p.on_air_octets as f64 * 100.0,
                })
                .collect(),
        };
        Self {
            header: ReportHeader {
                artifact: "motkip",
                version: env!("CARGO_PKG_VERSION"),
                seed: config.seed,
                generator: GENERATOR_NAME,
                config,
            },
            rows,
            derived,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# {} {}", self.header.artifact, self.header.version).unwrap();
        writeln!(out, "# seed={}", self.header.seed).unwrap();
        writeln!(out, "# generator={}", self.header.generator).unwrap();
        for line in self.header.config.to_text().lines() {
            writeln!(out, "# config {line}").unwrap();
        }
        writeln!(out, "{}", MetricsRow::csv_header()).unwrap();
        for r in &self.rows {
            writeln!(out, "{}", r.to_csv()).unwrap();
        }
        for d in &self.derived {
            writeln!(
                out,
                "# derived scheme={} goodput_degradation_pct={:.4} on_air_overhead_pct={:.4}",
                d.scheme, d.goodput_degradation_pct, d.on_air_overhead_pct
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail") + "\n"
    }
}

pub fn run(config: &BenchConfig, threads: usize) -> Result<Vec<SessionMetrics>> {
    let keys = KeyMaterial::from_seed(config.key_seed);
    Ok(sweep(&[config.channel()], &config.profiles(), &keys, threads)?)
}

/// Extracts the echoed configuration from a CSV or JSON report so it can be re-run.
pub fn config_from_report(text: &str) -> Result<BenchConfig> {
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(text).context("parsing JSON report")?;
        return serde_json::from_value(v["header"]["config"].clone()).context("header.config");
    }
    let mut cfg = BenchConfig::default();
    let mut seen = false;
    for line in text.lines() {
        if let Some(kv) = line.strip_prefix("# config ") {
            let (k, v) = kv.split_once('=').context("malformed config echo")?;
            cfg.set(k, v)?;
            seen = true;
        }
    }
    if !seen {
        bail!("no '# config' lines in report");
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let mut c = BenchConfig::preset(Preset::Table2);
        c.loss_prob = 0.125;
        c.schemes = vec![Scheme::Tkip, Scheme::MoTkip];
        let mut back = BenchConfig::default();
        back.apply_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn bytes_sets_count() {
        let c = BenchConfig::preset(Preset::Table2).resolved().unwrap();
        assert_eq!(c.msdu_count, 3496);
    }

    #[test]
    fn rejects_bad_keys() {
        let mut c = BenchConfig::default();
        assert!(c.apply_text("nonsense=1").is_err());
        assert!(c.apply_text("loss_prob=abc").is_err());
        assert!(c.apply_text("schemes=tkip,rot13").is_err());
        assert!(BenchConfig { reorder_depth: 17, ..Default::default() }.resolved().is_err());
    }
}
