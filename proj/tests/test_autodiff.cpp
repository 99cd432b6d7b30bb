#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gnncl/tensor.hpp"
#include "testutil.hpp"

using namespace gnncl;
using testutil::max_fd_gap;
using testutil::random_tensor;

namespace {

bool all_finite(const Tensor& t) {
  for (double v : t.data())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

TEST_CASE("product rule") {
  Tensor x = Tensor::scalar(3.0, true);
  Tensor y = Tensor::scalar(4.0, true);
  Tape tape;
  Tensor loss = tape.mul(x, y);
  CHECK(loss.item() == doctest::Approx(12.0));
  tape.backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(4.0));
  CHECK(y.grad()[0] == doctest::Approx(3.0));
}

TEST_CASE("relu gates the gradient") {
  Tensor w = Tensor::from_data(1, 2, {-1.0, 2.0}, true);
  Tape tape;
  Tensor loss = tape.sum_all(tape.relu(w));
  tape.backward(loss);
  CHECK(w.grad()[0] == 0.0);
  CHECK(w.grad()[1] == 1.0);
}

TEST_CASE("two-layer 8-4-1 network matches finite differences") {
  Rng rng(11);
  Tensor w1 = Tensor::glorot(8, 4, rng);
  Tensor b1 = Tensor::zeros(1, 4, true);
  Tensor w2 = Tensor::glorot(4, 1, rng);
  Tensor b2 = Tensor::zeros(1, 1, true);
  Tensor x = random_tensor(1, 8, rng, false);
  auto build = [&](Tape& t) {
    Tensor hidden = t.relu(t.add_rowvec(t.matmul(x, w1), b1));
    Tensor prob = t.sigmoid(t.add_rowvec(t.matmul(hidden, w2), b2));
    return t.bce_mean(prob, {1.0});
  };
  CHECK(max_fd_gap(build, {w1, b1, w2, b2}) < 1e-4);
}

TEST_CASE("error paths: non-scalar loss, foreign tape, spent tape, empty tensor") {
  Tensor x = Tensor::from_data(2, 2, {1, 2, 3, 4}, true);

  {
    Tape tape;
    Tensor y = tape.relu(x);
    CHECK_THROWS(tape.backward(y));
  }
  {
    Tape one;
    Tensor mid = one.relu(x);
    Tensor s = one.sum_all(x);
    Tape two;
    CHECK_THROWS(two.relu(mid));
    CHECK_THROWS(two.backward(s));
  }
  {
    Tape tape;
    Tensor loss = tape.sum_all(x);
    tape.backward(loss);
    CHECK_THROWS(tape.backward(loss));
  }
  {
    Tape tape;
    Tensor empty;
    CHECK_THROWS(tape.relu(empty));
  }
}

TEST_CASE("gradient through concatenation reassembles exactly") {
  Rng rng(7);
  Tensor a = random_tensor(3, 2, rng);
  Tensor b = random_tensor(3, 4, rng);
  Tensor whole = Tensor::from_data(3, 6, [&] {
    std::vector<double> v;
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 2; ++c) v.push_back(a.at(r, c));
      for (std::size_t c = 0; c < 4; ++c) v.push_back(b.at(r, c));
    }
    return v;
  }(), true);
  Tensor mask = random_tensor(3, 6, rng, false);

  {
    Tape tape;
    Tensor loss = tape.sum_all(tape.mul(tape.concat_cols({a, b}), mask));
    tape.backward(loss);
  }
  {
    Tape tape;
    Tensor loss = tape.sum_all(tape.mul(whole, mask));
    tape.backward(loss);
  }
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 2; ++c)
      CHECK(a.grad()[r * 2 + c] == whole.grad()[r * 6 + c]);
    for (std::size_t c = 0; c < 4; ++c)
      CHECK(b.grad()[r * 4 + c] == whole.grad()[r * 6 + 2 + c]);
  }
}

TEST_CASE("forward determinism is bitwise") {
  Rng rng(3);
  Tensor w = Tensor::glorot(5, 3, rng);
  Tensor x = random_tensor(4, 5, rng, false);
  Tape t1;
  Tensor y1 = t1.tanh(t1.matmul(x, w));
  Tape t2;
  Tensor y2 = t2.tanh(t2.matmul(x, w));
  CHECK(y1.data() == y2.data());
  CHECK(all_finite(y1));
}

TEST_CASE("every primitive matches finite differences on randomized cases") {
  Rng rng(2024);
  double worst = 0.0;
  auto track = [&](double gap) {
    if (gap > worst) worst = gap;
    return gap;
  };
  for (int iter = 0; iter < 100; ++iter) {
    {
      Tensor a = random_tensor(3, 4, rng);
      Tensor b = random_tensor(4, 2, rng);
      auto build = [&](Tape& t) { return t.sum_all(t.matmul(a, b)); };
      CHECK(track(max_fd_gap(build, {a, b})) < 1e-4);
    }
    {
      Tensor a = random_tensor(3, 4, rng);
      Tensor b = random_tensor(3, 4, rng);
      auto build_add = [&](Tape& t) { return t.mean_all(t.add(a, b)); };
      auto build_sub = [&](Tape& t) { return t.mean_all(t.sub(a, b)); };
      auto build_mul = [&](Tape& t) { return t.sum_all(t.mul(a, b)); };
      CHECK(track(max_fd_gap(build_add, {a, b})) < 1e-4);
      CHECK(track(max_fd_gap(build_sub, {a, b})) < 1e-4);
      CHECK(track(max_fd_gap(build_mul, {a, b})) < 1e-4);
    }
    {
      Tensor x = random_tensor(3, 4, rng);
      Tensor row = random_tensor(1, 4, rng);
      auto build = [&](Tape& t) { return t.sum_all(t.add_rowvec(x, row)); };
      CHECK(track(max_fd_gap(build, {x, row})) < 1e-4);
    }
    {
      Tensor x = random_tensor(2, 3, rng);
      auto build_scale = [&](Tape& t) { return t.sum_all(t.scale(x, 1.7)); };
      auto build_relu = [&](Tape& t) { return t.sum_all(t.relu(x)); };
      auto build_sig = [&](Tape& t) { return t.sum_all(t.sigmoid(x)); };
      auto build_tanh = [&](Tape& t) { return t.sum_all(t.tanh(x)); };
      auto build_l1 = [&](Tape& t) { return t.sum_all(t.l1_row_norm(x)); };
      CHECK(track(max_fd_gap(build_scale, {x})) < 1e-4);
      CHECK(track(max_fd_gap(build_relu, {x})) < 1e-4);
      CHECK(track(max_fd_gap(build_sig, {x})) < 1e-4);
      CHECK(track(max_fd_gap(build_tanh, {x})) < 1e-4);
      CHECK(track(max_fd_gap(build_l1, {x})) < 1e-4);
    }
    {
      Tensor a = random_tensor(2, 2, rng);
      Tensor b = random_tensor(2, 3, rng);
      Tensor m = random_tensor(2, 5, rng, false);
      auto build = [&](Tape& t) {
        return t.sum_all(t.mul(t.concat_cols({a, b}), m));
      };
      CHECK(track(max_fd_gap(build, {a, b})) < 1e-4);
    }
    {
      Tensor x = random_tensor(2, 5, rng);
      auto build = [&](Tape& t) {
        return t.sum_all(t.sigmoid(t.slice_cols(x, 1, 3)));
      };
      CHECK(track(max_fd_gap(build, {x})) < 1e-4);
    }
    {
      Tensor x = random_tensor(4, 3, rng);
      std::vector<std::size_t> idx = {2, 0, 2, 3};
      auto build = [&](Tape& t) {
        return t.sum_all(t.tanh(t.gather_rows(x, idx)));
      };
      CHECK(track(max_fd_gap(build, {x})) < 1e-4);
    }
    {
      Tensor x = random_tensor(2, 5, rng);
      Tensor kernels = random_tensor(2, 3, rng);
      Tensor bias = random_tensor(1, 2, rng);
      auto build = [&](Tape& t) {
        return t.sum_all(t.sigmoid(t.conv1d_same(x, kernels, bias)));
      };
      CHECK(track(max_fd_gap(build, {x, kernels, bias})) < 1e-4);
    }
    {
      Tensor x = random_tensor(2, 6, rng);
      auto build = [&](Tape& t) {
        return t.sum_all(t.max_pool_blocks(x, 2, 2));
      };
      CHECK(track(max_fd_gap(build, {x})) < 1e-4);
    }
    {
      Tensor x = random_tensor(3, 1, rng);
      std::vector<double> labels = {1.0, 0.0, 1.0};
      auto build = [&](Tape& t) { return t.bce_mean(t.sigmoid(x), labels); };
      CHECK(track(max_fd_gap(build, {x})) < 1e-4);
    }
    {
      SparseCoeffs coeffs;
      coeffs.size = 3;
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c)
          if (rng.bernoulli(0.6)) coeffs.add(r, c, rng.uniform(-1.0, 1.0));
      Tensor x = random_tensor(3, 2, rng);
      auto build = [&](Tape& t) {
        return t.sum_all(t.tanh(t.apply_coeffs(coeffs, x)));
      };
      CHECK(track(max_fd_gap(build, {x})) < 1e-4);
    }
  }
  MESSAGE("worst relative gap across primitives: " << worst);
}
