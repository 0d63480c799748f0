//! Multinomial Naive Bayes over bag-of-words counts with Laplace smoothing.
//!
//! Likelihoods are estimated over the vocabulary's content tokens only;
//! PAD and UNK occurrences are skipped at both training and prediction.

use crate::corpus::{Dataset, Label};
use crate::error::{Error, Result};
use crate::neural::linalg::{softmax, Mat};
use crate::text::Vocabulary;

#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    pub alpha: f64,
    pub log_prior: Mat,      // 1 x 2
    pub log_likelihood: Mat, // 2 x content vocab size
}

impl NbModel {
    pub fn train(d: &Dataset, vocab: &Vocabulary, alpha: f64) -> Result<NbModel> {
        if alpha <= 0.0 {
            return Err(Error::InvalidConfig(
                "NB smoothing alpha must be > 0".into(),
            ));
        }
        let content = vocab.content_len();
        let mut counts = Mat::zeros(2, content);
        let mut totals = [0.0f64; 2];
        let mut docs = [0usize; 2];
        for s in &d.samples {
            let class = s.label.index();
            docs[class] += 1;
            for id in vocab.encode(&s.tokens) {
                if id >= 2 {
                    *counts.at_mut(class, id - 2) += 1.0;
                    totals[class] += 1.0;
                }
            }
        }
        for (label, n) in [(Label::Negative, docs[0]), (Label::Positive, docs[1])] {
            if n == 0 {
                return Err(Error::EmptyClass(label));
            }
        }

        let n_docs = (docs[0] + docs[1]) as f64;
        let mut log_prior = Mat::zeros(1, 2);
        let mut log_likelihood = Mat::zeros(2, content);
        for class in 0..2 {
            *log_prior.at_mut(0, class) = (docs[class] as f64 / n_docs).ln();
            let denom = totals[class] + alpha * content as f64;
            for tok in 0..content {
                *log_likelihood.at_mut(class, tok) = ((counts.at(class, tok) + alpha) / denom).ln();
            }
        }
        Ok(NbModel {
            alpha,
            log_prior,
            log_likelihood,
        })
    }

    /// Posterior distribution [p(neg), p(pos)] for an encoded sequence.
    pub fn posterior(&self, ids: &[usize]) -> Vec<f64> {
        let mut log_post = [self.log_prior.at(0, 0), self.log_prior.at(0, 1)];
        for &id in ids {
            if id >= 2 {
                for (class, lp) in log_post.iter_mut().enumerate() {
                    *lp += self.log_likelihood.at(class, id - 2);
                }
            }
        }
        softmax(&log_post)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sample;
    use crate::text::tokenize;

    fn corpus() -> (Dataset, Vocabulary) {
        let d = Dataset::new(
            "t",
            vec![
                Sample {
                    id: 0,
                    tokens: tokenize("good"),
                    label: Label::Positive,
                },
                Sample {
                    id: 1,
                    tokens: tokenize("bad"),
                    label: Label::Negative,
                },
            ],
        );
        let vocab = Vocabulary::build(&d, 1).unwrap();
        (d, vocab)
    }

    #[test]
    fn laplace_estimates_match_hand_computation() {
        let (d, vocab) = corpus();
        let m = NbModel::train(&d, &vocab, 1.0).unwrap();
        // p("good"|pos) = (1 + 1) / (1 + V) with V = 2 content tokens
        let good = vocab.get("good").unwrap() - 2;
        let expected = (1.0 + 1.0) / (1.0 + 2.0);
        assert!((m.log_likelihood.at(1, good).exp() - expected).abs() < 1e-12);
        // p("good"|neg) = (0 + 1) / (1 + V)
        assert!((m.log_likelihood.at(0, good).exp() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn likelihoods_sum_to_one_per_class() {
        let (d, vocab) = corpus();
        let m = NbModel::train(&d, &vocab, 1.0).unwrap();
        for class in 0..2 {
            let sum: f64 = (0..vocab.content_len())
                .map(|t| m.log_likelihood.at(class, t).exp())
                .sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_matches_hand_bayes() {
        let (d, vocab) = corpus();
        let m = NbModel::train(&d, &vocab, 1.0).unwrap();
        let ids = vocab.encode(&tokenize("good"));
        let post = m.posterior(&ids);
        // prior 1/2 each; p(good|pos) = 2/3, p(good|neg) = 1/3
        let p_pos = 0.5 * (2.0 / 3.0);
        let p_neg = 0.5 * (1.0 / 3.0);
        let expected = p_pos / (p_pos + p_neg);
        assert!((post[1] - expected).abs() < 1e-12);
        assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_tokens_fall_back_to_the_prior() {
        let (d, vocab) = corpus();
        let m = NbModel::train(&d, &vocab, 1.0).unwrap();
        let ids = vocab.encode(&tokenize("zebra quux"));
        let post = m.posterior(&ids);
        assert!((post[0] - 0.5).abs() < 1e-12);
    }
}
