//! From-scratch differentiable primitives: LSTM cell, bidirectional
//! encoding, attention pooling, softmax head, 1D convolution with max
//! pooling, inverted dropout, Adam, and a finite-difference gradient
//! checker. Everything is `f64`.

pub mod adam;
pub mod attention;
pub mod conv;
pub mod gradcheck;
pub mod linalg;
pub mod lstm;
pub mod net;
pub mod ops;

pub use adam::{AdamConfig, AdamState};
pub use attention::{attention, AttentionParams};
pub use conv::{conv_maxpool, ConvParams};
pub use gradcheck::{grad_check_bilstm, grad_check_cnn, max_relative_error, numeric_gradient};
pub use linalg::{softmax, Mat};
pub use lstm::{bilstm_encode, lstm_cell, LstmParams};
pub use net::{AttnBiLstmNet, CnnNet, ParamMats};
pub use ops::{classify_head, cross_entropy, dropout, dropout_mask, HeadParams};
