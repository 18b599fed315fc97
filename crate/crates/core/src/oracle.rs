//! Correspondence verification oracles.
//!
//! An [`Oracle`] answers "is this correspondence correct?" with a verdict and a
//! confidence in `[0.5, 1.0]`. Three backends are provided:
//! - [`SimulatedOracle`]: flips the ground-truth verdict with probability
//!   `1 − accuracy`, drawing from a hash of `(seed, correspondence id)` so answers
//!   do not depend on query order;
//! - [`ReplayOracle`]: answers from a JSONL transcript of an earlier run;
//! - [`LlmOracle`]: renders a prompt, calls a chat-completion endpoint with retry
//!   and an on-disk cache, and parses the model's reply.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{CandidateResultSet, Correspondence, PairKey};

pub const API_KEY_ENV: &str = "ORACLE_API_KEY";
pub const DEFAULT_SIMULATED_ACCURACY: f64 = 0.918;
pub const DEFAULT_FIXED_CONFIDENCE: f64 = 0.9;
pub const PROMPT_VALUE_LIMIT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Simulated,
    Replay,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub corr_id: String,
    pub verdict: bool,
    pub confidence: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_response: Option<String>,
}

pub trait Oracle: Send + Sync {
    fn verify(&self, c: &Correspondence) -> Result<Answer>;

    /// Answers in the same order as `batch`.
    fn verify_batch(&self, batch: &[&Correspondence]) -> Vec<Result<Answer>> {
        batch.iter().map(|c| self.verify(c)).collect()
    }
}

// ---------------------------------------------------------------------------
// Prompt templates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    Semantic,
    Abbreviation,
}

impl std::str::FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semantic" => Ok(Template::Semantic),
            "abbreviation" => Ok(Template::Abbreviation),
            other => Err(Error::MalformedInput(format!(
                "unknown template `{other}` (expected semantic or abbreviation)"
            ))),
        }
    }
}

impl std::fmt::Display for Template {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Template::Semantic => "semantic",
            Template::Abbreviation => "abbreviation",
        })
    }
}

pub const INSTRUCTION: &str =
    "Determine whether the two attributes match with each other in schema match.";

const OUTPUT_INDICATOR: &str = "\
Respond with a single JSON object and nothing else, in exactly this form:
{\"answer\": true, \"confidence\": 0.9}
Set \"answer\" to true if the attributes match and false otherwise. Set \"confidence\" to a number between 0.0 and 1.0 stating how certain you are of the answer.
";

const SEMANTIC_TEMPLATE: &str = "\
Determine whether the two attributes match with each other in schema match.

Source attribute: {source_attributes}
Target attribute: {target_attributes}

{output_indicator}";

const ABBREVIATION_TEMPLATE: &str = "\
Determine whether the two attributes match with each other in schema match.

Tips:
(1) Both attributes come from datasets about {schema_name}. Use your knowledge of this domain to interpret the attribute names and values.
(2) Attribute names are often abbreviated. An abbreviation may keep only the first letters of a word (\"qty\" for \"quantity\", \"desc\" for \"description\"), or join such prefixes of several words (\"custid\" for \"customer id\").
(3) An abbreviation may also be built from the initial letters of several words (\"dob\" for \"date of birth\") or by dropping vowels (\"nm\" for \"name\", \"addr\" for \"address\"). Expand each name with these rules before comparing.
(4) Exchange the attribute values: imagine the source values stored under the target attribute and the target values stored under the source attribute. If the values would still fit, or the two value sets overlap or look alike, the attributes are likely to match.

Source attribute: {source_attributes}
Source values:
{source_values}
Target attribute: {target_attributes}
Target values:
{target_values}

{output_indicator}";

/// Raw template text with `{placeholder}` markers.
pub fn template_text(template: Template) -> &'static str {
    match template {
        Template::Semantic => SEMANTIC_TEMPLATE,
        Template::Abbreviation => ABBREVIATION_TEMPLATE,
    }
}

/// SHA-256 of the template text together with the output indicator; changes
/// whenever the wording does.
pub fn template_hash(template: Template) -> String {
    sha256_hex(&[template_text(template), OUTPUT_INDICATOR].concat())
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn attribute_list(attrs: &[crate::model::AttributeRef]) -> String {
    attrs
        .iter()
        .map(|a| a.name.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

fn value_lines(attrs: &[crate::model::AttributeRef]) -> String {
    attrs
        .iter()
        .map(|a| {
            let values = if a.sample_values.is_empty() {
                "(no sample values)".to_string()
            } else {
                a.sample_values
                    .iter()
                    .take(PROMPT_VALUE_LIMIT)
                    .map(|v| format!("\"{v}\""))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            format!("- {}: {values}", a.name)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Fills a template for one correspondence. The abbreviation template needs a
/// non-empty `schema_name` (dataset or domain name).
pub fn render_prompt(c: &Correspondence, template: Template, schema_name: &str) -> Result<String> {
    let text = template_text(template);
    let filled = match template {
        Template::Semantic => text
            .replace("{source_attributes}", &attribute_list(&c.source_attrs))
            .replace("{target_attributes}", &attribute_list(&c.target_attrs)),
        Template::Abbreviation => {
            let schema_name = schema_name.trim();
            if schema_name.is_empty() {
                return Err(Error::MissingSchemaName);
            }
            text.replace("{schema_name}", schema_name)
                .replace("{source_attributes}", &attribute_list(&c.source_attrs))
                .replace("{target_attributes}", &attribute_list(&c.target_attrs))
                .replace("{source_values}", &value_lines(&c.source_attrs))
                .replace("{target_values}", &value_lines(&c.target_attrs))
        }
    };
    Ok(filled.replace("{output_indicator}", OUTPUT_INDICATOR))
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

/// Extracts `(verdict, confidence)` from a model reply.
///
/// The first JSON object carrying an `answer` key wins; otherwise the first
/// `true`/`false` token is taken together with a percentage or a number after
/// "confidence". Confidences above 1 are read as percentages. A confidence
/// below 0.5 flips the verdict (`c := 1 − c`). Missing confidence falls back to
/// `fallback_confidence`.
pub fn parse_llm_response(text: &str, fallback_confidence: f64) -> Result<(bool, f64)> {
    let (verdict, confidence) = match parse_json_answer(text) {
        Some(found) => found,
        None => parse_loose(text)?,
    };
    Ok(normalize(verdict, confidence.unwrap_or(fallback_confidence)))
}

fn normalize(verdict: bool, confidence: f64) -> (bool, f64) {
    let mut c = if confidence > 1.0 && confidence <= 100.0 {
        confidence / 100.0
    } else {
        confidence
    };
    let mut v = verdict;
    if c < 0.5 {
        v = !v;
        c = 1.0 - c;
    }
    (v, c.clamp(0.5, 1.0))
}

fn parse_json_answer(text: &str) -> Option<(bool, Option<f64>)> {
    for (i, _) in text.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
        let Some(Ok(Value::Object(map))) = stream.next() else {
            continue;
        };
        let Some(verdict) = map.get("answer").and_then(verdict_value) else {
            continue;
        };
        let confidence = map.get("confidence").and_then(confidence_value);
        return Some((verdict, confidence));
    }
    None
}

fn verdict_value(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::String(s) => match s.trim().to_ascii_lowercase().as_str() {
            "true" | "yes" => Some(true),
            "false" | "no" => Some(false),
            _ => None,
        },
        _ => None,
    }
}

fn confidence_value(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().trim_end_matches('%').trim().parse().ok(),
        _ => None,
    }
    .filter(|c: &f64| c.is_finite() && *c >= 0.0)
}

fn parse_loose(text: &str) -> Result<(bool, Option<f64>)> {
    static VERDICT: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    static PERCENT: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    static LABELLED: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    let verdict_re = VERDICT.get_or_init(|| Regex::new(r"(?i)\b(true|false)\b").unwrap());
    let percent_re = PERCENT.get_or_init(|| Regex::new(r"(\d+(?:\.\d+)?)\s*%").unwrap());
    let labelled_re = LABELLED
        .get_or_init(|| Regex::new(r"(?i)confidence\D{0,20}?(\d*\.\d+|\d+)").unwrap());

    let verdict = verdict_re
        .captures(text)
        .map(|c| c[1].eq_ignore_ascii_case("true"))
        .ok_or_else(|| {
            let excerpt: String = text.chars().take(80).collect();
            Error::ParseFailure(format!("no true/false verdict in `{excerpt}`"))
        })?;
    let confidence = percent_re
        .captures(text)
        .and_then(|c| c[1].parse::<f64>().ok())
        .map(|p| p / 100.0)
        .or_else(|| {
            labelled_re
                .captures(text)
                .and_then(|c| c[1].parse::<f64>().ok())
        });
    Ok((verdict, confidence))
}

// ---------------------------------------------------------------------------
// Ground truth and the simulated oracle
// ---------------------------------------------------------------------------

/// One line of a ground-truth file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthEntry {
    pub source_attrs: Vec<String>,
    pub target_attrs: Vec<String>,
    #[serde(rename = "match")]
    pub is_match: bool,
}

impl GroundTruthEntry {
    pub fn key(&self) -> PairKey {
        PairKey::new(self.source_attrs.iter().cloned(), self.target_attrs.iter().cloned())
    }
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<Vec<GroundTruthEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

pub fn save_ground_truth(path: impl AsRef<Path>, entries: &[GroundTruthEntry]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, crate::to_canonical_json(&entries)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct SimulatedOracle {
    accuracy: f64,
    seed: u64,
    truth: HashMap<PairKey, bool>,
    missing_as_false: bool,
}

impl SimulatedOracle {
    pub fn new(accuracy: f64, seed: u64, truth: &[GroundTruthEntry]) -> Result<Self> {
        if !(accuracy > 0.5 && accuracy <= 1.0) {
            return Err(Error::MalformedInput(format!(
                "simulated accuracy {accuracy} outside (0.5, 1.0]"
            )));
        }
        Ok(Self {
            accuracy,
            seed,
            truth: truth.iter().map(|e| (e.key(), e.is_match)).collect(),
            missing_as_false: false,
        })
    }

    /// Treat pairs absent from the ground truth as non-matches instead of failing.
    pub fn missing_as_false(mut self, yes: bool) -> Self {
        self.missing_as_false = yes;
        self
    }

    /// Uniform draw in `[0, 1)` determined by `(seed, corr_id)` alone.
    fn draw(&self, corr_id: &str) -> f64 {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(corr_id.as_bytes());
        let digest = hasher.finalize();
        let mut bytes = [0u8; 32];
        bytes.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(bytes).gen::<f64>()
    }
}

impl Oracle for SimulatedOracle {
    fn verify(&self, c: &Correspondence) -> Result<Answer> {
        let truth = match self.truth.get(&c.pair_key()) {
            Some(&t) => t,
            None if self.missing_as_false => false,
            None => return Err(Error::GroundTruthMissing(c.id.clone())),
        };
        let correct = self.draw(&c.id) < self.accuracy;
        Ok(Answer {
            corr_id: c.id.clone(),
            verdict: if correct { truth } else { !truth },
            confidence: self.accuracy,
            provenance: Provenance::Simulated,
            raw_response: None,
        })
    }
}

// ---------------------------------------------------------------------------
// Transcripts and the replay oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub corr_id: String,
    pub verdict: bool,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<Template>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_sha256: Option<String>,
    /// Seconds since the Unix epoch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

pub fn load_transcript(path: impl AsRef<Path>) -> Result<Vec<TranscriptEntry>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        entries.push(serde_json::from_str(&line).map_err(|e| Error::json(path, e))?);
    }
    Ok(entries)
}

#[derive(Debug, Clone)]
pub struct ReplayOracle {
    entries: HashMap<String, TranscriptEntry>,
}

impl ReplayOracle {
    /// Later entries for the same correspondence replace earlier ones.
    pub fn new(entries: Vec<TranscriptEntry>) -> Self {
        Self {
            entries: entries.into_iter().map(|e| (e.corr_id.clone(), e)).collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(load_transcript(path)?))
    }
}

impl Oracle for ReplayOracle {
    fn verify(&self, c: &Correspondence) -> Result<Answer> {
        let e = self
            .entries
            .get(&c.id)
            .ok_or_else(|| Error::TranscriptMiss(c.id.clone()))?;
        let (verdict, confidence) = normalize(e.verdict, e.confidence);
        Ok(Answer {
            corr_id: c.id.clone(),
            verdict,
            confidence,
            provenance: Provenance::Replay,
            raw_response: None,
        })
    }
}

// ---------------------------------------------------------------------------
// LLM oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub template: Template,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Overrides the model's self-reported confidence.
    #[serde(default)]
    pub fixed_confidence: Option<f64>,
    #[serde(default)]
    pub transcript_path: Option<PathBuf>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_max_retries() -> u32 {
    3
}
fn default_in_flight() -> usize {
    4
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_timeout_secs() -> u64 {
    60
}

impl LlmConfig {
    pub fn new(endpoint_url: impl Into<String>, model_name: impl Into<String>, template: Template) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            model_name: model_name.into(),
            template,
            temperature: 0.0,
            max_retries: default_max_retries(),
            cache_dir: None,
            fixed_confidence: None,
            transcript_path: None,
            max_in_flight: default_in_flight(),
            backoff_base_ms: default_backoff_ms(),
            timeout_secs: default_timeout_secs(),
        }
    }
}

pub struct LlmOracle {
    cfg: LlmConfig,
    api_key: String,
    schema_name: String,
    client: reqwest::blocking::Client,
    transcript: Option<Mutex<File>>,
}

impl std::fmt::Debug for LlmOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // the key is never printed
        f.debug_struct("LlmOracle")
            .field("cfg", &self.cfg)
            .field("schema_name", &self.schema_name)
            .finish_non_exhaustive()
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

impl LlmOracle {
    /// Reads the API key from `ORACLE_API_KEY`.
    pub fn from_env(cfg: LlmConfig, schema_name: impl Into<String>) -> Result<Self> {
        let key = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or(Error::MissingApiKey(API_KEY_ENV))?;
        Self::new(cfg, key, schema_name)
    }

    pub fn new(cfg: LlmConfig, api_key: String, schema_name: impl Into<String>) -> Result<Self> {
        if cfg.temperature < 0.0 {
            return Err(Error::MalformedInput("temperature must be >= 0".into()));
        }
        if let Some(c) = cfg.fixed_confidence {
            if !(0.5..=1.0).contains(&c) {
                return Err(Error::MalformedInput(format!(
                    "fixed confidence {c} outside [0.5, 1.0]"
                )));
            }
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| Error::HttpFailure(e.to_string()))?;
        let transcript = match &cfg.transcript_path {
            Some(path) => Some(Mutex::new(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| Error::io(path, e))?,
            )),
            None => None,
        };
        if let Some(dir) = &cfg.cache_dir {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(Self {
            cfg,
            api_key,
            schema_name: schema_name.into(),
            client,
            transcript,
        })
    }

    /// Cache file name: hash of (model, template hash, prompt hash).
    pub fn cache_key(model: &str, template: Template, prompt: &str) -> String {
        sha256_hex(&format!(
            "{model}\u{0}{}\u{0}{}",
            template_hash(template),
            sha256_hex(prompt)
        ))
    }

    fn cache_path(&self, prompt: &str) -> Option<PathBuf> {
        self.cfg.cache_dir.as_ref().map(|dir| {
            dir.join(format!(
                "{}.json",
                Self::cache_key(&self.cfg.model_name, self.cfg.template, prompt)
            ))
        })
    }

    fn complete(&self, prompt: &str) -> Result<String> {
        let body = ChatRequest {
            model: &self.cfg.model_name,
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: self.cfg.temperature,
        };
        let mut attempt = 0u32;
        loop {
            let outcome = self
                .client
                .post(&self.cfg.endpoint_url)
                .bearer_auth(&self.api_key)
                .json(&body)
                .send();
            let retryable_error = match outcome {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let json: Value = resp
                            .json()
                            .map_err(|e| Error::HttpFailure(format!("invalid response body: {e}")))?;
                        return json
                            .pointer("/choices/0/message/content")
                            .and_then(Value::as_str)
                            .map(str::to_string)
                            .ok_or_else(|| {
                                Error::ParseFailure("response has no choices[0].message.content".into())
                            });
                    }
                    let retryable = status.as_u16() == 429 || status.is_server_error();
                    let msg = format!("status {status}");
                    if !retryable {
                        return Err(Error::HttpFailure(msg));
                    }
                    msg
                }
                Err(e) => e.to_string(),
            };
            if attempt >= self.cfg.max_retries {
                return Err(Error::HttpFailure(format!(
                    "{retryable_error} (after {} attempts)",
                    attempt + 1
                )));
            }
            let delay = self
                .cfg
                .backoff_base_ms
                .saturating_mul(1u64 << attempt.min(16))
                .min(30_000);
            log::warn!("oracle request failed ({retryable_error}); retrying in {delay} ms");
            std::thread::sleep(Duration::from_millis(delay));
            attempt += 1;
        }
    }

    fn record(&self, answer: &Answer, prompt: &str) -> Result<()> {
        let Some(file) = &self.transcript else {
            return Ok(());
        };
        let entry = TranscriptEntry {
            corr_id: answer.corr_id.clone(),
            verdict: answer.verdict,
            confidence: answer.confidence,
            template: Some(self.cfg.template),
            prompt_sha256: Some(sha256_hex(prompt)),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs()),
        };
        let line = serde_json::to_string(&entry).expect("serializable entry");
        let mut f = file.lock().expect("transcript lock");
        writeln!(f, "{line}").map_err(|e| Error::io(self.cfg.transcript_path.as_ref().unwrap(), e))
    }
}

impl Oracle for LlmOracle {
    fn verify(&self, c: &Correspondence) -> Result<Answer> {
        let prompt = render_prompt(c, self.cfg.template, &self.schema_name)?;
        let cache = self.cache_path(&prompt);
        if let Some(path) = &cache {
            if let Ok(text) = fs::read_to_string(path) {
                if let Ok(mut answer) = serde_json::from_str::<Answer>(&text) {
                    answer.corr_id = c.id.clone();
                    self.record(&answer, &prompt)?;
                    return Ok(answer);
                }
            }
        }
        let reply = self.complete(&prompt)?;
        let fallback = self.cfg.fixed_confidence.unwrap_or(DEFAULT_FIXED_CONFIDENCE);
        let (verdict, mut confidence) = parse_llm_response(&reply, fallback)?;
        if let Some(fixed) = self.cfg.fixed_confidence {
            confidence = fixed;
        }
        let answer = Answer {
            corr_id: c.id.clone(),
            verdict,
            confidence,
            provenance: Provenance::Llm,
            raw_response: Some(reply),
        };
        if let Some(path) = &cache {
            let text = serde_json::to_string(&answer).expect("serializable answer");
            fs::write(path, text).map_err(|e| Error::io(path, e))?;
        }
        self.record(&answer, &prompt)?;
        Ok(answer)
    }

    fn verify_batch(&self, batch: &[&Correspondence]) -> Vec<Result<Answer>> {
        let width = self.cfg.max_in_flight.max(1);
        let mut out = Vec::with_capacity(batch.len());
        for chunk in batch.chunks(width) {
            let results: Vec<Result<Answer>> = std::thread::scope(|s| {
                let handles: Vec<_> = chunk.iter().map(|c| s.spawn(move || self.verify(c))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("oracle worker panicked"))
                    .collect()
            });
            out.extend(results);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OracleConfig {
    Simulated {
        accuracy: f64,
        seed: u64,
        ground_truth_path: PathBuf,
        #[serde(default)]
        missing_as_false: bool,
    },
    Replay {
        transcript_path: PathBuf,
    },
    Llm(LlmConfig),
}

/// Instantiates the configured backend. `crs` supplies the schema name for
/// prompts (`source / target`).
pub fn build_oracle(cfg: &OracleConfig, crs: &CandidateResultSet) -> Result<Box<dyn Oracle>> {
    Ok(match cfg {
        OracleConfig::Simulated {
            accuracy,
            seed,
            ground_truth_path,
            missing_as_false,
        } => {
            let truth = load_ground_truth(ground_truth_path)?;
            Box::new(SimulatedOracle::new(*accuracy, *seed, &truth)?.missing_as_false(*missing_as_false))
        }
        OracleConfig::Replay { transcript_path } => Box::new(ReplayOracle::load(transcript_path)?),
        OracleConfig::Llm(llm) => Box::new(LlmOracle::from_env(llm.clone(), schema_name(crs))?),
    })
}

/// Domain label used to fill the abbreviation template.
pub fn schema_name(crs: &CandidateResultSet) -> String {
    if crs.source_schema == crs.target_schema {
        crs.source_schema.clone()
    } else {
        format!("{} and {}", crs.source_schema, crs.target_schema)
    }
}
