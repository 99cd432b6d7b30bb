#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gnncl/mlp.hpp"
#include "gnncl/tensor.hpp"

namespace gnncl {

enum class CellKind { kPaperRnn, kStandardLstm };

CellKind parse_cell_kind(const std::string& name);
std::string cell_kind_name(CellKind cell);

// Per-node classification head: same-length 1-D convolution over the
// embedding, non-overlapping max pooling, tanh, a reshape into `chunks`
// time steps, a bidirectional recurrence fused at the final step, and a
// sigmoid classifier.
class SequenceHead {
 public:
  // Throws when the pooled feature length is not divisible by `chunks` or
  // the embedding is shorter than the conv window.
  SequenceHead(std::size_t embed_dim, std::size_t num_kernels,
               std::size_t half_width, std::size_t chunks, std::size_t hidden,
               CellKind cell, Rng& rng);

  std::size_t embed_dim() const { return embed_dim_; }
  std::size_t chunk_width() const { return chunk_width_; }
  std::size_t chunks() const { return chunks_; }
  CellKind cell() const { return cell_; }

  // h: [batch x embed_dim] -> fraud probabilities [batch x 1].
  Tensor forward(Tape& tape, const Tensor& h) const;

  std::vector<Tensor> parameters() const;
  void collect_named(const std::string& prefix,
                     std::vector<std::pair<std::string, Tensor>>& out) const;

 private:
  Tensor recur_paper(Tape& tape, const std::vector<Tensor>& steps) const;
  Tensor recur_lstm(Tape& tape, const std::vector<Tensor>& steps) const;
  Tensor lstm_chain(Tape& tape, const std::vector<Tensor>& steps,
                    const Tensor& wx, const Tensor& wh, const Tensor& b) const;

  std::size_t embed_dim_, num_kernels_, window_, chunks_, chunk_width_, hidden_;
  CellKind cell_;
  Tensor kernels_;    // [num_kernels x window]
  Tensor conv_bias_;  // [1 x num_kernels]
  // paper-rnn: tanh cells, sigmoid fusion gate
  Tensor wa_f_, wr_f_, wa_b_, wr_b_, mix_f_, mix_b_;
  // standard-lstm: gate blocks ordered i,f,g,o
  Tensor lstm_wx_f_, lstm_wh_f_, lstm_b_f_;
  Tensor lstm_wx_b_, lstm_wh_b_, lstm_b_b_;
  Mlp classifier_;
};

}  // namespace gnncl
