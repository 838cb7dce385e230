#include "agentgraph/nn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace agentgraph;

namespace {

MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

MatrixXd col(std::initializer_list<double> v) {
  MatrixXd m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

MatrixXd random_matrix(Index r, Index c, Rng& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  MatrixXd m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

}  // namespace

TEST(Affine, IdentityWeightsPassInputThrough) {
  ParameterStore s;
  s.add("w", 2, 2).value = mat({{1, 0}, {0, 1}});
  s.add("b", 2, 1).value = col({0, 0});
  Tape t(false);
  Var y = nn::affine(t, s.at("w"), &s.at("b"), t.constant(col({3, 4})));
  EXPECT_EQ(t.value(y), col({3, 4}));
}

TEST(Affine, RowTimesColumnPlusBias) {
  ParameterStore s;
  s.add("w", 1, 2).value = mat({{1, 2}});
  s.add("b", 1, 1).value = col({1});
  Tape t(false);
  Var y = nn::affine(t, s.at("w"), &s.at("b"), t.constant(col({3, 4})));
  EXPECT_DOUBLE_EQ(t.value(y)(0, 0), 12.0);
}

TEST(Affine, MatchesStraightLineRecomputation) {
  Rng rng(0);
  ParameterStore s;
  s.add("w", 7, 5).value = random_matrix(7, 5, rng);
  s.add("b", 7, 1).value = random_matrix(7, 1, rng);
  const MatrixXd x = random_matrix(5, 1, rng);
  Tape t(false);
  const MatrixXd y = t.value(nn::affine(t, s.at("w"), &s.at("b"), t.constant(x)));
  for (Index r = 0; r < 7; ++r) {
    double acc = s.at("b").value(r, 0);
    for (Index c = 0; c < 5; ++c) acc += s.at("w").value(r, c) * x(c, 0);
    EXPECT_NEAR(y(r, 0), acc, 1e-12);
  }
}

TEST(Affine, ShapeMismatchNamesTheBlocks) {
  ParameterStore s;
  s.add("enc/w", 3, 4);
  s.add("enc/b", 3, 1);
  Tape t(false);
  try {
    nn::affine(t, s.at("enc/w"), &s.at("enc/b"), t.constant(MatrixXd::Zero(5, 1)));
    FAIL() << "expected ConfigurationError";
  } catch (const ConfigurationError& e) {
    EXPECT_NE(std::string(e.what()).find("enc/w"), std::string::npos);
  }
  s.add("bad/b", 2, 1);
  try {
    nn::affine(t, s.at("enc/w"), &s.at("bad/b"), t.constant(MatrixXd::Zero(4, 1)));
    FAIL() << "expected ConfigurationError";
  } catch (const ConfigurationError& e) {
    EXPECT_NE(std::string(e.what()).find("bad/b"), std::string::npos);
  }
}

TEST(Relu, ForwardClampsNegatives) {
  Tape t(false);
  EXPECT_EQ(t.value(nn::relu(t, t.constant(col({-1, 0, 2})))), col({0, 0, 2}));
  EXPECT_TRUE(t.value(nn::relu(t, t.constant(col({-3, -0.5, -7})))).isZero());
}

TEST(Relu, SubgradientIsOneForPositiveZeroOtherwise) {
  ParameterStore s;
  s.add("x", 3, 1).value = col({2, -1, 0});
  Tape t;
  t.backward(nn::sum(t, nn::relu(t, t.parameter(s.at("x")))));
  EXPECT_EQ(s.at("x").gradient, col({1, 0, 0}));
}

TEST(Backward, SumOfProductGivesInputAsGradient) {
  ParameterStore s;
  s.add("w", 1, 2).value = mat({{0.3, -0.7}});
  Tape t;
  t.backward(nn::sum(t, nn::affine(t, s.at("w"), nullptr, t.constant(col({1, 1})))));
  EXPECT_EQ(s.at("w").gradient, mat({{1, 1}}));
}

TEST(Backward, SharedBlockAccumulatesBothPaths) {
  Rng rng(3);
  ParameterStore s;
  s.add("w", 2, 3).value = random_matrix(2, 3, rng);
  const MatrixXd x1 = random_matrix(3, 1, rng);
  const MatrixXd x2 = random_matrix(3, 1, rng);

  auto grad_of = [&](const std::vector<MatrixXd>& xs) {
    s.zero_gradients();
    Tape t;
    std::vector<Var> outs;
    for (const auto& x : xs) outs.push_back(nn::sum(t, nn::affine(t, s.at("w"), nullptr, t.constant(x))));
    Var loss = outs[0];
    for (std::size_t i = 1; i < outs.size(); ++i) loss = nn::add(t, loss, outs[i]);
    t.backward(loss);
    return MatrixXd(s.at("w").gradient);
  };
  const MatrixXd g1 = grad_of({x1});
  const MatrixXd g2 = grad_of({x2});
  const MatrixXd both = grad_of({x1, x2});
  EXPECT_TRUE(both.isApprox(g1 + g2, 1e-14));
}

TEST(Backward, WithoutForwardIsUsageError) {
  Tape t;
  EXPECT_THROW(t.backward(Var{}), UsageError);
  EXPECT_THROW(t.backward(Var{0}), UsageError);
  Tape inference(false);
  Var c = inference.constant(MatrixXd::Ones(1, 1));
  EXPECT_THROW(inference.backward(c), UsageError);
}

TEST(Backward, ClearsTheTape) {
  ParameterStore s;
  s.add("w", 1, 1).value.setOnes();
  Tape t;
  t.backward(nn::sum(t, t.parameter(s.at("w"))));
  EXPECT_EQ(t.size(), 0u);
  EXPECT_THROW(t.backward(Var{0}), UsageError);
}

namespace {

struct TwoLayerNet {
  ParameterStore store;
  MatrixXd x;
  MatrixXd target;

  explicit TwoLayerNet(std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<int> width(1, 6);
    const int in = width(rng), hid = width(rng), out = width(rng), batch = width(rng);
    nn::glorot_uniform(store.add("l0/w", hid, in).value, rng);
    store.add("l0/b", hid, 1).value = random_matrix(hid, 1, rng);
    nn::glorot_uniform(store.add("l1/w", out, hid).value, rng);
    store.add("l1/b", out, 1).value = random_matrix(out, 1, rng);
    x = random_matrix(in, batch, rng);
    target = random_matrix(out, batch, rng);
  }

  double loss(Tape& t, Var* out = nullptr) {
    Var h = nn::relu(t, nn::affine(t, store.at("l0/w"), &store.at("l0/b"), t.constant(x)));
    Var y = nn::affine(t, store.at("l1/w"), &store.at("l1/b"), h);
    Var l = nn::mse(t, y, target);
    if (out) *out = l;
    return t.value(l)(0, 0);
  }
};

}  // namespace

// Property: analytic gradients agree with central differences on random 2-layer nets.
TEST(Backward, MatchesCentralDifferencesOnRandomNets) {
  constexpr double h = 1e-5;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    TwoLayerNet net(seed);
    {
      Tape t;
      Var l;
      net.loss(t, &l);
      t.backward(l);
    }
    for (auto& [name, block] : net.store) {
      for (Index i = 0; i < block.value.size(); ++i) {
        const double analytic = block.gradient.data()[i];
        const double orig = block.value.data()[i];
        block.value.data()[i] = orig + h;
        Tape tp(false);
        const double up = net.loss(tp);
        block.value.data()[i] = orig - h;
        Tape tm(false);
        const double down = net.loss(tm);
        block.value.data()[i] = orig;
        const double numeric = (up - down) / (2 * h);
        EXPECT_LT(std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic)), 1e-4)
            << "seed " << seed << " block " << name << " index " << i;
      }
    }
  }
}

TEST(Ops, MeanOfIsIndependentOfInputOrderBitwise) {
  Rng rng(11);
  std::vector<MatrixXd> parts;
  for (int i = 0; i < 6; ++i) parts.push_back(random_matrix(4, 3, rng) * std::pow(10.0, i - 3));
  Tape t(false);
  std::vector<Var> a, b;
  for (const auto& p : parts) a.push_back(t.constant(p));
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) b.push_back(t.constant(*it));
  std::swap(b[1], b[4]);
  const MatrixXd ma = t.value(nn::mean_of<double>(t, a));
  const MatrixXd mb = t.value(nn::mean_of<double>(t, b));
  EXPECT_EQ(0, std::memcmp(ma.data(), mb.data(), sizeof(double) * static_cast<std::size_t>(ma.size())));
}

TEST(Ops, MeanOfTwoMessagesIsArithmeticMean) {
  Tape t(false);
  std::vector<Var> in{t.constant(col({1, 2})), t.constant(col({3, 4}))};
  EXPECT_EQ(t.value(nn::mean_of<double>(t, in)), col({2, 3}));
}

TEST(Ops, MaxOfRoutesGradientToWinner) {
  ParameterStore s;
  s.add("a", 2, 1).value = col({1, 5});
  s.add("b", 2, 1).value = col({3, 2});
  Tape t;
  std::vector<Var> in{t.parameter(s.at("a")), t.parameter(s.at("b"))};
  Var m = nn::max_of<double>(t, in);
  EXPECT_EQ(t.value(m), col({3, 5}));
  t.backward(nn::sum(t, m));
  EXPECT_EQ(s.at("a").gradient, col({0, 1}));
  EXPECT_EQ(s.at("b").gradient, col({1, 0}));
}

TEST(Adam, ZeroGradientLeavesValuesButCountsStep) {
  Rng rng(1);
  ParameterStore s;
  s.add("w", 3, 2).value = random_matrix(3, 2, rng);
  const MatrixXd before = s.at("w").value;
  Adam opt;
  opt.step(s);
  EXPECT_EQ(s.at("w").value, before);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // Hand computation: m1 = 0.1, v1 = 0.001, m̂ = 1, v̂ = 1 -> Δ = -lr / (1 + eps).
  ParameterStore s;
  s.add("p", 1, 1).value(0, 0) = 0.5;
  s.at("p").gradient(0, 0) = 1.0;
  Adam opt(nn::AdamOptions{0.1, 0.9, 0.999, 1e-8});
  opt.step(s);
  EXPECT_NEAR(s.at("p").value(0, 0) - 0.5, -0.1 / (1.0 + 1e-8), 1e-12);
  EXPECT_EQ(s.at("p").gradient(0, 0), 0.0);
}

TEST(Adam, AliasedBlockReceivesOneUpdate) {
  ParameterStore s;
  s.add("p", 1, 1).value(0, 0) = 0.0;
  {
    Tape t;
    Var p1 = t.parameter(s.at("p"));
    Var p2 = t.parameter(s.at("p"));  // same block, same leaf
    EXPECT_EQ(p1.id, p2.id);
    t.backward(nn::add(t, p1, p2));
  }
  EXPECT_EQ(s.at("p").gradient(0, 0), 2.0);
  Adam opt(nn::AdamOptions{0.1});
  opt.step(s);
  // One Adam step moves by ~lr regardless of gradient magnitude.
  EXPECT_NEAR(s.at("p").value(0, 0), -0.1, 1e-9);
}

TEST(Adam, NonFiniteGradientNamesTheBlock) {
  ParameterStore s;
  s.add("ok", 1, 1);
  s.add("bad/block", 2, 1).gradient(1, 0) = std::numeric_limits<double>::quiet_NaN();
  Adam opt;
  try {
    opt.step(s);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("bad/block"), std::string::npos);
  }
  EXPECT_EQ(opt.steps(), 0);
}

TEST(ParameterStoreTest, LookupsAliasTheSameBlock) {
  ParameterStore s;
  auto& a = s.get_or_add("x/S/input/0/w", 2, 3);
  auto& b = s.get_or_add("x/S/input/0/w", 2, 3);
  EXPECT_EQ(&a, &b);
  EXPECT_THROW(s.get_or_add("x/S/input/0/w", 3, 3), ConfigurationError);
  EXPECT_THROW(s.add("x/S/input/0/w", 2, 3), ConfigurationError);
  EXPECT_THROW(s.at("missing"), UsageError);
}

TEST(ParameterStoreTest, GlorotInitIsSeedDeterministicAndBounded) {
  MatrixXd a(30, 20), b(30, 20), c(30, 20);
  Rng r1(42), r2(42), r3(43);
  nn::glorot_uniform(a, r1);
  nn::glorot_uniform(b, r2);
  nn::glorot_uniform(c, r3);
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * 600));
  EXPECT_NE(a, c);
  EXPECT_LE(a.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 50.0));
}

// Property: JSON serialization reproduces every value bit-exactly.
TEST(Serialization, RoundTripIsBitExact) {
  Rng rng(5);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int trial = 0; trial < 20; ++trial) {
    ParameterStore s;
    auto& w = s.add("w" + std::to_string(trial), 1 + trial % 4, 1 + trial % 3);
    for (Index i = 0; i < w.value.size(); ++i) w.value.data()[i] = mant(rng) * std::pow(10.0, expo(rng));
    auto& b = s.add("b", 3, 1);
    b.value << 0.1, -1.0 / 3.0, 5e-324;
    const auto text = nn::store_to_json(s).dump();
    const ParameterStore back = nn::store_from_json<double>(nlohmann::json::parse(text));
    ASSERT_EQ(back.size(), s.size());
    for (const auto& [name, blk] : s) {
      const auto& other = back.at(name);
      ASSERT_EQ(other.rows(), blk.rows());
      ASSERT_EQ(other.cols(), blk.cols());
      EXPECT_EQ(0, std::memcmp(other.value.data(), blk.value.data(),
                               sizeof(double) * static_cast<std::size_t>(blk.value.size())));
    }
  }
}

TEST(Serialization, RejectsFutureVersionAndMalformedBlocks) {
  nlohmann::json j = {{"format_version", 99}, {"blocks", nlohmann::json::object()}};
  EXPECT_THROW(nn::store_from_json<double>(j), CheckpointError);
  j = {{"format_version", 1}, {"blocks", {{"w", {{"shape", {2, 2}}, {"values", {1, 2, 3}}}}}}};
  try {
    nn::store_from_json<double>(j);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("blocks.w.values"), std::string::npos);
  }
}
