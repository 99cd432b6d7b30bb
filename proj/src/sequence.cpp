#include "gnncl/sequence.hpp"

#include <stdexcept>

namespace gnncl {

CellKind parse_cell_kind(const std::string& name) {
  if (name == "paper-rnn") return CellKind::kPaperRnn;
  if (name == "standard-lstm") return CellKind::kStandardLstm;
  throw std::invalid_argument("unknown cell kind: " + name);
}

std::string cell_kind_name(CellKind cell) {
  return cell == CellKind::kPaperRnn ? "paper-rnn" : "standard-lstm";
}

SequenceHead::SequenceHead(std::size_t embed_dim, std::size_t num_kernels,
                           std::size_t half_width, std::size_t chunks,
                           std::size_t hidden, CellKind cell, Rng& rng)
    : embed_dim_(embed_dim),
      num_kernels_(num_kernels),
      window_(2 * half_width + 1),
      chunks_(chunks),
      hidden_(hidden),
      cell_(cell) {
  if (num_kernels == 0 || chunks == 0 || hidden == 0)
    throw std::invalid_argument("sequence head: zero-sized component");
  if (embed_dim < window_)
    throw std::invalid_argument(
        "sequence head: embedding shorter than the conv window");
  const std::size_t pooled = (embed_dim + window_ - 1) / window_;
  const std::size_t flat = num_kernels * pooled;
  if (flat % chunks != 0)
    throw std::invalid_argument(
        "sequence head: pooled length " + std::to_string(flat) +
        " is not divisible into " + std::to_string(chunks) + " chunks");
  chunk_width_ = flat / chunks;

  kernels_ = Tensor::glorot(num_kernels_, window_, rng);
  conv_bias_ = Tensor::zeros(1, num_kernels_, true);
  if (cell_ == CellKind::kPaperRnn) {
    wa_f_ = Tensor::glorot(chunk_width_, hidden_, rng);
    wr_f_ = Tensor::glorot(hidden_, hidden_, rng);
    wa_b_ = Tensor::glorot(chunk_width_, hidden_, rng);
    wr_b_ = Tensor::glorot(hidden_, hidden_, rng);
  } else {
    lstm_wx_f_ = Tensor::glorot(chunk_width_, 4 * hidden_, rng);
    lstm_wh_f_ = Tensor::glorot(hidden_, 4 * hidden_, rng);
    lstm_b_f_ = Tensor::zeros(1, 4 * hidden_, true);
    lstm_wx_b_ = Tensor::glorot(chunk_width_, 4 * hidden_, rng);
    lstm_wh_b_ = Tensor::glorot(hidden_, 4 * hidden_, rng);
    lstm_b_b_ = Tensor::zeros(1, 4 * hidden_, true);
  }
  mix_f_ = Tensor::glorot(hidden_, hidden_, rng);
  mix_b_ = Tensor::glorot(hidden_, hidden_, rng);
  classifier_ = Mlp({hidden_, 1}, rng);
}

Tensor SequenceHead::forward(Tape& tape, const Tensor& h) const {
  if (h.cols() != embed_dim_)
    throw std::invalid_argument("sequence head: embedding width mismatch");
  Tensor conv = tape.relu(tape.conv1d_same(h, kernels_, conv_bias_));
  Tensor pooled = tape.max_pool_blocks(conv, num_kernels_, window_);
  Tensor feat = tape.tanh(pooled);
  std::vector<Tensor> steps;
  steps.reserve(chunks_);
  for (std::size_t n = 0; n < chunks_; ++n)
    steps.push_back(tape.slice_cols(feat, n * chunk_width_, chunk_width_));
  Tensor fused = cell_ == CellKind::kPaperRnn ? recur_paper(tape, steps)
                                              : recur_lstm(tape, steps);
  return classifier_.forward(tape, fused);
}

Tensor SequenceHead::recur_paper(Tape& tape,
                                 const std::vector<Tensor>& steps) const {
  const std::size_t batch = steps.front().rows();
  Tensor fwd = Tensor::zeros(batch, hidden_);
  for (std::size_t n = 0; n < chunks_; ++n)
    fwd = tape.tanh(tape.add(tape.matmul(steps[n], wa_f_),
                             tape.matmul(fwd, wr_f_)));
  // The fusion reads the backward state aligned with the final time step,
  // which is the backward chain's first state: fed by the last chunk from a
  // zero initial state.
  Tensor zero = Tensor::zeros(batch, hidden_);
  Tensor bwd = tape.tanh(tape.add(tape.matmul(steps.back(), wa_b_),
                                  tape.matmul(zero, wr_b_)));
  return tape.sigmoid(
      tape.add(tape.matmul(fwd, mix_f_), tape.matmul(bwd, mix_b_)));
}

Tensor SequenceHead::lstm_chain(Tape& tape, const std::vector<Tensor>& steps,
                                const Tensor& wx, const Tensor& wh,
                                const Tensor& b) const {
  const std::size_t batch = steps.front().rows();
  Tensor h = Tensor::zeros(batch, hidden_);
  Tensor c = Tensor::zeros(batch, hidden_);
  for (const Tensor& x : steps) {
    Tensor gates = tape.add_rowvec(
        tape.add(tape.matmul(x, wx), tape.matmul(h, wh)), b);
    Tensor in = tape.sigmoid(tape.slice_cols(gates, 0, hidden_));
    Tensor forget = tape.sigmoid(tape.slice_cols(gates, hidden_, hidden_));
    Tensor cand = tape.tanh(tape.slice_cols(gates, 2 * hidden_, hidden_));
    Tensor out = tape.sigmoid(tape.slice_cols(gates, 3 * hidden_, hidden_));
    c = tape.add(tape.mul(forget, c), tape.mul(in, cand));
    h = tape.mul(out, tape.tanh(c));
  }
  return h;
}

Tensor SequenceHead::recur_lstm(Tape& tape,
                                const std::vector<Tensor>& steps) const {
  Tensor fwd = lstm_chain(tape, steps, lstm_wx_f_, lstm_wh_f_, lstm_b_f_);
  // Aligned-at-final-step fusion: the backward chain contributes only its
  // first state, fed by the last chunk.
  Tensor bwd = lstm_chain(tape, {steps.back()}, lstm_wx_b_, lstm_wh_b_,
                          lstm_b_b_);
  return tape.sigmoid(
      tape.add(tape.matmul(fwd, mix_f_), tape.matmul(bwd, mix_b_)));
}

std::vector<Tensor> SequenceHead::parameters() const {
  std::vector<Tensor> out = {kernels_, conv_bias_};
  if (cell_ == CellKind::kPaperRnn) {
    out.insert(out.end(), {wa_f_, wr_f_, wa_b_, wr_b_});
  } else {
    out.insert(out.end(), {lstm_wx_f_, lstm_wh_f_, lstm_b_f_, lstm_wx_b_,
                           lstm_wh_b_, lstm_b_b_});
  }
  out.insert(out.end(), {mix_f_, mix_b_});
  for (const Tensor& p : classifier_.parameters()) out.push_back(p);
  return out;
}

void SequenceHead::collect_named(
    const std::string& prefix,
    std::vector<std::pair<std::string, Tensor>>& out) const {
  out.emplace_back(prefix + ".kernels", kernels_);
  out.emplace_back(prefix + ".conv_bias", conv_bias_);
  if (cell_ == CellKind::kPaperRnn) {
    out.emplace_back(prefix + ".wa_f", wa_f_);
    out.emplace_back(prefix + ".wr_f", wr_f_);
    out.emplace_back(prefix + ".wa_b", wa_b_);
    out.emplace_back(prefix + ".wr_b", wr_b_);
  } else {
    out.emplace_back(prefix + ".lstm_wx_f", lstm_wx_f_);
    out.emplace_back(prefix + ".lstm_wh_f", lstm_wh_f_);
    out.emplace_back(prefix + ".lstm_b_f", lstm_b_f_);
    out.emplace_back(prefix + ".lstm_wx_b", lstm_wx_b_);
    out.emplace_back(prefix + ".lstm_wh_b", lstm_wh_b_);
    out.emplace_back(prefix + ".lstm_b_b", lstm_b_b_);
  }
  out.emplace_back(prefix + ".mix_f", mix_f_);
  out.emplace_back(prefix + ".mix_b", mix_b_);
  classifier_.collect_named(prefix + ".classifier", out);
}

}  // namespace gnncl
