use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::weight::weight_based_rollout;
use crate::mdp::{AoiEnv, EnvConfig, StateMatrix};
use crate::nn::{Activation, DenseNet, LstmCell, LstmStep, NetworkParams, NnError, Optimizer, OptimizerConfig, ParamShape};
use crate::scenario::Scenario;

/// A sequence of normalized state columns in their natural order.
pub type Sequence = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutoencoderError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("search range is empty")]
    EmptyRange,
    #[error("sequence has {got} rows per column, model expects {expected}")]
    Width { expected: usize, got: usize },
    #[error(transparent)]
    Network(#[from] NnError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderConfig {
    /// Hidden (and cell) width of both LSTMs.
    pub hidden: usize,
    /// Number of leading cell entries handed to the decoder and exposed in
    /// the representation; `None` means all of them.
    pub cell_size: Option<usize>,
    pub epochs: usize,
    /// Sequences per gradient step; values at least the training size give
    /// full-batch descent.
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            hidden: 8,
            cell_size: None,
            epochs: 60,
            batch_size: 16,
            optimizer: OptimizerConfig::adam(1e-2),
            train_fraction: 0.7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderReport {
    /// Mean training loss per epoch, measured before that epoch's updates.
    pub train_curve: Vec<f64>,
    pub train_mse: f64,
    pub test_mse: f64,
    pub train_size: usize,
    pub test_size: usize,
}

/// Sequence-to-sequence LSTM autoencoder.
///
/// The encoder reads the columns last to first, so its final input is the
/// initial column. The decoder starts from the encoder's final `(h, c)` (cell
/// entries past `cell_size` zeroed), is fed a zero vector and then the
/// previous target column, and a linear readout maps each hidden state back
/// to a column of the flipped sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmAutoencoder {
    pub encoder: LstmCell,
    pub decoder: LstmCell,
    pub readout: DenseNet,
    pub cell_size: usize,
}

struct Trace {
    enc: Vec<LstmStep>,
    dec: Vec<LstmStep>,
    outputs: Vec<Vec<f64>>,
}

impl LstmAutoencoder {
    pub fn new(width: usize, hidden: usize, cell_size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let encoder = LstmCell::random(width, hidden, &mut rng);
        let decoder = LstmCell::random(width, hidden, &mut rng);
        let readout = DenseNet::new(&[hidden, width], &[Activation::Identity], &mut rng);
        LstmAutoencoder { encoder, decoder, readout, cell_size: cell_size.min(hidden) }
    }

    pub fn hidden(&self) -> usize {
        self.encoder.hidden
    }

    /// Rows per column.
    pub fn width(&self) -> usize {
        self.encoder.input_size
    }

    pub fn num_params(&self) -> usize {
        self.encoder.num_params() + self.decoder.num_params() + self.readout.num_params()
    }

    /// Final `(c, h)` of the encoder over the flipped columns.
    pub fn encode(&self, columns: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        let k = self.hidden();
        let (mut h, mut c) = (vec![0.0; k], vec![0.0; k]);
        for x in columns.iter().rev() {
            (h, c) = self.encoder.step(&h, &c, x).expect("column width matches the encoder");
        }
        (c, h)
    }

    fn mask(&self, c: &mut [f64]) {
        for v in c.iter_mut().skip(self.cell_size) {
            *v = 0.0;
        }
    }

    fn trace(&self, columns: &[Vec<f64>]) -> Result<Trace, AutoencoderError> {
        let k = self.hidden();
        for col in columns {
            if col.len() != self.width() {
                return Err(AutoencoderError::Width { expected: self.width(), got: col.len() });
            }
        }
        let flipped: Vec<Vec<f64>> = columns.iter().rev().cloned().collect();
        let enc = self.encoder.run(&vec![0.0; k], &vec![0.0; k], &flipped)?;
        let (h0, mut c0) = match enc.last() {
            Some(last) => (last.h.clone(), last.c.clone()),
            None => (vec![0.0; k], vec![0.0; k]),
        };
        self.mask(&mut c0);
        let mut inputs = Vec::with_capacity(flipped.len());
        inputs.push(vec![0.0; self.width()]);
        inputs.extend(flipped.iter().take(flipped.len().saturating_sub(1)).cloned());
        let dec = self.decoder.run(&h0, &c0, &inputs)?;
        let outputs = dec.iter().map(|s| self.readout.forward(&s.h)).collect::<Result<_, _>>()?;
        Ok(Trace { enc, dec, outputs })
    }

    /// The flipped sequence as reconstructed under teacher forcing.
    pub fn reconstruct(&self, columns: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, AutoencoderError> {
        Ok(self.trace(columns)?.outputs)
    }

    /// Mean squared error over every entry of the reconstruction.
    pub fn loss(&self, columns: &[Vec<f64>]) -> Result<f64, AutoencoderError> {
        let out = self.trace(columns)?.outputs;
        Ok(mse(&out, columns.iter().rev()))
    }

    /// Loss and its gradient in the layout of [`LstmAutoencoder::params`],
    /// accumulated into `grads` with weight `scale`.
    pub fn loss_and_grad(&self, columns: &[Vec<f64>], scale: f64, grads: &mut [f64]) -> Result<f64, AutoencoderError> {
        let tr = self.trace(columns)?;
        let n = (columns.len() * self.width()).max(1) as f64;
        let loss = mse(&tr.outputs, columns.iter().rev());
        let ne = self.encoder.num_params();
        let nd = self.decoder.num_params();
        let (g_enc, rest) = grads.split_at_mut(ne);
        let (g_dec, g_out) = rest.split_at_mut(nd);

        let mut dh_steps = Vec::with_capacity(tr.dec.len());
        for ((step, y), target) in tr.dec.iter().zip(&tr.outputs).zip(columns.iter().rev()) {
            let dy: Vec<f64> = y.iter().zip(target).map(|(a, b)| 2.0 * (a - b) * scale / n).collect();
            let cache = self.readout.forward_cache(&step.h)?;
            dh_steps.push(self.readout.backward(&cache, &dy, g_out)?);
        }
        let k = self.hidden();
        let zero = vec![0.0; k];
        let (dh0, mut dc0, _) = self.decoder.backward_sequence(&tr.dec, Some(&dh_steps), &zero, &zero, g_dec);
        self.mask(&mut dc0);
        self.encoder.backward_sequence(&tr.enc, None, &dh0, &dc0, g_enc);
        Ok(loss)
    }

    /// Encoder, decoder, then readout.
    pub fn params(&self) -> Vec<f64> {
        let mut out = self.encoder.params();
        out.extend(self.decoder.params());
        out.extend(self.readout.params());
        out
    }

    pub fn set_params(&mut self, values: &[f64]) -> Result<(), NnError> {
        crate::nn::check_len(self.num_params(), values.len())?;
        let ne = self.encoder.num_params();
        let nd = self.decoder.num_params();
        self.encoder.set_params(&values[..ne])?;
        self.decoder.set_params(&values[ne..ne + nd])?;
        self.readout.set_params(&values[ne + nd..])
    }

    pub fn manifest(&self) -> Vec<ParamShape> {
        let mut out = self.encoder.manifest("encoder");
        out.extend(self.decoder.manifest("decoder"));
        out.extend(self.readout.manifest());
        out
    }

    pub fn to_params(&self) -> NetworkParams {
        NetworkParams::new(self.manifest(), self.params()).expect("manifest matches parameter count")
    }

    pub fn load_params(&mut self, p: &NetworkParams) -> Result<(), NnError> {
        if p.manifest != self.manifest() {
            return Err(NnError::Manifest);
        }
        self.set_params(&p.values)
    }

    /// Shuffles the corpus, splits it into train and test parts and fits a
    /// fresh model by backpropagation through time. A corpus too small to
    /// leave a test part is evaluated on its training part.
    pub fn train(corpus: &[Sequence], config: &AutoencoderConfig) -> Result<(Self, AutoencoderReport), AutoencoderError> {
        let width = corpus.iter().find_map(|s| s.first()).map(Vec::len).ok_or(AutoencoderError::EmptyCorpus)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        order.shuffle(&mut rng);
        let n_train = (crate::math::round(corpus.len() as f64 * config.train_fraction) as usize).clamp(1, corpus.len());
        let (train, test) = order.split_at(n_train);
        let test = if test.is_empty() { train } else { test };

        let cell = config.cell_size.unwrap_or(config.hidden);
        let mut model = LstmAutoencoder::new(width, config.hidden, cell, config.seed);
        let mut optimizer = Optimizer::new(config.optimizer, model.num_params());
        let mut batch_order = train.to_vec();
        let batch = config.batch_size.max(1);
        let mut curve = Vec::with_capacity(config.epochs);
        for _ in 0..config.epochs {
            curve.push(model.mean_loss(corpus, train)?);
            batch_order.shuffle(&mut rng);
            for chunk in batch_order.chunks(batch) {
                let mut grads = vec![0.0; model.num_params()];
                let scale = 1.0 / chunk.len() as f64;
                for &i in chunk {
                    model.loss_and_grad(&corpus[i], scale, &mut grads)?;
                }
                let mut params = model.params();
                optimizer.step(&mut params, &grads)?;
                model.set_params(&params)?;
            }
        }
        let report = AutoencoderReport {
            train_curve: curve,
            train_mse: model.mean_loss(corpus, train)?,
            test_mse: model.mean_loss(corpus, test)?,
            train_size: train.len(),
            test_size: test.len(),
        };
        Ok((model, report))
    }

    fn mean_loss(&self, corpus: &[Sequence], idx: &[usize]) -> Result<f64, AutoencoderError> {
        let mut total = 0.0;
        for &i in idx {
            total += self.loss(&corpus[i])?;
        }
        Ok(total / idx.len() as f64)
    }
}

fn mse<'a>(outputs: &[Vec<f64>], targets: impl Iterator<Item = &'a Vec<f64>>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (y, t) in outputs.iter().zip(targets) {
        for (a, b) in y.iter().zip(t) {
            sum += (a - b) * (a - b);
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Normalized column sequences of the given states.
pub fn corpus_from_states(s: &Scenario, states: &[StateMatrix]) -> Vec<Sequence> {
    states.iter().map(|st| st.normalized_columns(s)).collect()
}

/// Candidate sizes for the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchSpace {
    /// Cell and hidden sizes tied to each candidate.
    Joint(Vec<usize>),
    /// Independent ranges: the LSTM width is `k_h` and only the first `k_c`
    /// cell entries survive (zero-padded when `k_c > k_h`).
    Padded { kc: Vec<usize>, kh: Vec<usize> },
}

impl SearchSpace {
    /// Grid points `(k_c, k_h)` in search order.
    pub fn grid(&self) -> Vec<(usize, usize)> {
        match self {
            SearchSpace::Joint(ks) => ks.iter().map(|&k| (k, k)).collect(),
            SearchSpace::Padded { kc, kh } => kc.iter().flat_map(|&c| kh.iter().map(move |&h| (c, h))).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub k_c: usize,
    pub k_h: usize,
    pub test_mse: f64,
    /// `(k_c, k_h, test MSE)` for every grid point.
    pub grid: Vec<(usize, usize, f64)>,
    pub model: LstmAutoencoder,
    pub report: AutoencoderReport,
    pub corpus_size: usize,
}

/// Gathers states from `episodes` weight-based rollouts, trains one model per
/// grid point and keeps the lowest test error; ties go to the earlier point.
pub fn hyperparameter_search(
    s: &Scenario,
    space: &SearchSpace,
    episodes: usize,
    env_config: EnvConfig,
    config: &AutoencoderConfig,
) -> Result<SearchResult, AutoencoderError> {
    let grid = space.grid();
    if grid.is_empty() {
        return Err(AutoencoderError::EmptyRange);
    }
    let mut env = AoiEnv::new(s.clone(), env_config);
    let mut states = Vec::new();
    for e in 0..episodes {
        states.extend(weight_based_rollout(&mut env, config.seed.wrapping_add(e as u64)).states);
    }
    search_corpus(&corpus_from_states(s, &states), space, config)
}

/// Trains one model per grid point on a fixed corpus and keeps the lowest
/// test error; ties go to the earlier point.
pub fn search_corpus(
    corpus: &[Sequence],
    space: &SearchSpace,
    config: &AutoencoderConfig,
) -> Result<SearchResult, AutoencoderError> {
    let grid = space.grid();
    if grid.is_empty() {
        return Err(AutoencoderError::EmptyRange);
    }
    if corpus.is_empty() {
        return Err(AutoencoderError::EmptyCorpus);
    }

    let mut best: Option<SearchResult> = None;
    let mut table = Vec::with_capacity(grid.len());
    for (kc, kh) in grid {
        let cfg = AutoencoderConfig { hidden: kh, cell_size: Some(kc), ..config.clone() };
        let (model, report) = LstmAutoencoder::train(corpus, &cfg)?;
        table.push((kc, kh, report.test_mse));
        if best.as_ref().map_or(true, |b| report.test_mse < b.test_mse) {
            best = Some(SearchResult {
                k_c: kc,
                k_h: kh,
                test_mse: report.test_mse,
                grid: Vec::new(),
                model,
                report,
                corpus_size: corpus.len(),
            });
        }
    }
    let mut best = best.expect("grid is nonempty");
    best.grid = table;
    Ok(best)
}
