#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gnncl/sequence.hpp"
#include "testutil.hpp"

using namespace gnncl;
using testutil::max_fd_gap;
using testutil::random_tensor;

namespace {

std::map<std::string, Tensor> named(const SequenceHead& head) {
  std::vector<std::pair<std::string, Tensor>> out;
  head.collect_named("head", out);
  return {out.begin(), out.end()};
}

void zero_params(const SequenceHead& head) {
  for (Tensor p : head.parameters()) p.data().assign(p.size(), 0.0);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("cell kind names round-trip") {
  CHECK(parse_cell_kind("paper-rnn") == CellKind::kPaperRnn);
  CHECK(parse_cell_kind("standard-lstm") == CellKind::kStandardLstm);
  CHECK(cell_kind_name(CellKind::kPaperRnn) == "paper-rnn");
  CHECK(cell_kind_name(CellKind::kStandardLstm) == "standard-lstm");
  CHECK_THROWS_AS(parse_cell_kind("gru"), std::invalid_argument);
}

TEST_CASE("construction rejects incompatible shape algebra") {
  Rng rng(1);
  // Embedding narrower than the conv window.
  CHECK_THROWS_AS(
      SequenceHead(2, 1, 1, 1, 4, CellKind::kPaperRnn, rng),
      std::invalid_argument);
  // 1 kernel, window 3 over 4 features pools to 2; 2 % 3 != 0.
  CHECK_THROWS_AS(
      SequenceHead(4, 1, 1, 3, 4, CellKind::kPaperRnn, rng),
      std::invalid_argument);
}

TEST_CASE("chunk widths follow the pooled layout") {
  Rng rng(2);
  // 12 features, window 3 -> 4 pooled per kernel, 4 kernels -> 16 flat.
  SequenceHead a(12, 4, 1, 4, 8, CellKind::kPaperRnn, rng);
  CHECK(a.chunks() == 4);
  CHECK(a.chunk_width() == 4);
  // 10 features, window 5 -> 2 pooled per kernel, 3 kernels -> 6 flat.
  SequenceHead b(10, 3, 2, 2, 5, CellKind::kStandardLstm, rng);
  CHECK(b.chunk_width() == 3);
  // Partial final pooling window: 7 features, window 3 -> 3 pooled.
  SequenceHead c(7, 2, 1, 3, 4, CellKind::kPaperRnn, rng);
  CHECK(c.chunk_width() == 2);
}

TEST_CASE("outputs are probabilities, one per row") {
  Rng rng(3);
  for (CellKind kind : {CellKind::kPaperRnn, CellKind::kStandardLstm}) {
    SequenceHead head(12, 4, 1, 4, 8, kind, rng);
    Tape tape;
    Tensor h = random_tensor(6, 12, rng, false);
    Tensor y = head.forward(tape, h);
    CHECK(y.rows() == 6);
    CHECK(y.cols() == 1);
    for (double v : y.data()) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("hand-built single-chunk network matches the closed form") {
  Rng rng(4);
  // window 3 identity kernel, one pooled value, one chunk, scalar cells.
  SequenceHead head(3, 1, 1, 1, 1, CellKind::kPaperRnn, rng);
  auto params = named(head);
  params.at("head.kernels").data() = {0.0, 1.0, 0.0};
  params.at("head.conv_bias").data() = {0.0};
  params.at("head.wa_f").data() = {1.0};
  params.at("head.wa_b").data() = {1.0};
  // Recurrent weights only ever multiply the zero initial state here.
  params.at("head.wr_f").data() = {7.0};
  params.at("head.wr_b").data() = {9.0};
  params.at("head.mix_f").data() = {1.0};
  params.at("head.mix_b").data() = {1.0};
  params.at("head.classifier.w0").data() = {1.0};
  params.at("head.classifier.b0").data() = {0.0};

  const double x = std::atanh(0.5);
  Tape tape;
  Tensor h = Tensor::from_data(1, 3, {x, 0.0, 0.0});
  // conv picks x, pool keeps it, tanh gives 0.5; both directions see the
  // same single chunk, so the gate input is 2 * tanh(0.5).
  const double fused = sigmoid(2.0 * std::tanh(0.5));
  CHECK(fused == doctest::Approx(0.7159040902975481).epsilon(1e-14));
  CHECK(head.forward(tape, h).item() ==
        doctest::Approx(sigmoid(fused)).epsilon(1e-12));
}

TEST_CASE("all-zero parameters collapse every input to one half") {
  Rng rng(5);
  for (CellKind kind : {CellKind::kPaperRnn, CellKind::kStandardLstm}) {
    SequenceHead head(12, 4, 1, 4, 8, kind, rng);
    zero_params(head);
    Tape tape;
    Tensor h = random_tensor(5, 12, rng, false);
    for (double v : head.forward(tape, h).data())
      CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("a large negative conv bias erases the input signal") {
  Rng rng(6);
  SequenceHead head(12, 2, 1, 2, 4, CellKind::kPaperRnn, rng);
  auto params = named(head);
  params.at("head.conv_bias").data() = {-100.0, -100.0};

  Tape tape;
  Tensor a = random_tensor(1, 12, rng, false);
  Tensor b = Tensor::from_data(1, 12, std::vector<double>(12, 0.25));
  const double ya = head.forward(tape, a).item();
  const double yb = head.forward(tape, b).item();
  CHECK(ya == doctest::Approx(yb).epsilon(1e-15));
}

TEST_CASE("duplicate rows produce identical outputs") {
  Rng rng(7);
  SequenceHead head(10, 3, 2, 2, 5, CellKind::kPaperRnn, rng);
  std::vector<double> row(10);
  for (double& v : row) v = rng.normal();
  std::vector<double> data = row;
  for (std::size_t i = 0; i < row.size(); ++i) data.push_back(rng.normal());
  data.insert(data.end(), row.begin(), row.end());
  Tape tape;
  Tensor h = Tensor::from_data(3, 10, data);
  Tensor y = head.forward(tape, h);
  CHECK(y.data()[0] == y.data()[2]);
}

TEST_CASE("the recurrence is sensitive to chunk order") {
  Rng rng(8);
  // 2 kernels, window 3, 12 features -> 8 flat values in 4 chunks of 2.
  SequenceHead head(12, 2, 1, 4, 4, CellKind::kPaperRnn, rng);
  Tensor h = random_tensor(1, 12, rng, false);
  Tape t1;
  const double base = head.forward(t1, h).item();

  // Same multiset of feature values, different order.
  Tensor rev = Tensor::zeros(1, 12);
  for (std::size_t i = 0; i < 12; ++i)
    rev.data()[i] = h.data()[11 - i];
  Tape t2;
  CHECK(head.forward(t2, rev).item() != base);
}

TEST_CASE("same seed builds identical heads, different seeds differ") {
  Tensor h = Tensor::from_data(2, 12, std::vector<double>(24, 0.3));
  Rng r1(9), r2(9), r3(10);
  SequenceHead a(12, 4, 1, 4, 8, CellKind::kPaperRnn, r1);
  SequenceHead b(12, 4, 1, 4, 8, CellKind::kPaperRnn, r2);
  SequenceHead c(12, 4, 1, 4, 8, CellKind::kPaperRnn, r3);
  Tape ta, tb, tc;
  CHECK(a.forward(ta, h).data() == b.forward(tb, h).data());
  CHECK(a.forward(ta, h).data() != c.forward(tc, h).data());
}

TEST_CASE("gradients agree with finite differences for both cells") {
  Rng rng(11);
  std::vector<double> labels = {1.0, 0.0, 1.0};
  for (CellKind kind : {CellKind::kPaperRnn, CellKind::kStandardLstm}) {
    CAPTURE(cell_kind_name(kind));
    // 8 features, window 3 -> 3 pooled per kernel, 2 kernels, 2 chunks.
    SequenceHead head(8, 2, 1, 2, 3, kind, rng);
    Tensor h = random_tensor(3, 8, rng);
    auto build = [&](Tape& tape) {
      return tape.bce_mean(head.forward(tape, h), labels);
    };
    std::vector<Tensor> params = head.parameters();
    params.push_back(h);
    CHECK(max_fd_gap(build, params) < 1e-4);
  }
}

TEST_CASE("named parameters cover both cell layouts") {
  Rng rng(12);
  SequenceHead rnn(12, 4, 1, 4, 8, CellKind::kPaperRnn, rng);
  SequenceHead lstm(12, 4, 1, 4, 8, CellKind::kStandardLstm, rng);
  auto rn = named(rnn);
  auto ln = named(lstm);
  CHECK(rn.size() == rnn.parameters().size());
  CHECK(ln.size() == lstm.parameters().size());
  CHECK(rn.count("head.wa_f") == 1);
  CHECK(rn.count("head.lstm_wx_f") == 0);
  CHECK(ln.count("head.lstm_wx_f") == 1);
  CHECK(ln.count("head.wa_f") == 0);
  // The lstm packs 4 gate blocks per direction.
  CHECK(ln.at("head.lstm_wx_f").cols() == 4 * 8);
}
