#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "sapg/composition.hpp"
#include "sapg/error.hpp"
#include "sapg/value_engine.hpp"
#include "support/oracles.hpp"

using namespace sapg;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("sapg_test_" + name)).string();
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

// All compositions of t into m parts, in colex order (by brute force).
std::vector<Config> all_configs(int m, int t) {
  std::vector<Config> out;
  Config c(static_cast<std::size_t>(m), 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == m - 1) {
      c[static_cast<std::size_t>(i)] = left;
      out.push_back(c);
      return;
    }
    for (int x = 0; x <= left; ++x) {
      c[static_cast<std::size_t>(i)] = x;
      rec(i + 1, left - x);
    }
  };
  rec(0, t);
  return out;
}

}  // namespace

TEST_CASE("composition ranking is a bijection consistent with next()") {
  for (int m : {2, 3, 4, 5}) {
    const CompositionIndex idx(m, 9);
    for (int t = 0; t <= 9; ++t) {
      CHECK(idx.layer_size(t) == static_cast<std::uint64_t>(oracle::binomial(t + m - 1, m - 1)));
      Config c(static_cast<std::size_t>(m), 0);
      c.back() = t;
      std::uint64_t r = 0;
      Config back(static_cast<std::size_t>(m));
      do {
        CHECK(idx.rank(c) == r);
        idx.unrank(t, r, back);
        CHECK(back == c);
        std::vector<std::uint64_t> off(static_cast<std::size_t>(m));
        idx.decrement_offsets(c, off);
        for (int e = 0; e < m; ++e) {
          if (c[static_cast<std::size_t>(e)] == 0) continue;
          Config d = c;
          --d[static_cast<std::size_t>(e)];
          CHECK(idx.rank(c) - idx.rank(d) == off[static_cast<std::size_t>(e)]);
        }
        ++r;
      } while (CompositionIndex::next(c));
      CHECK(r == idx.layer_size(t));
    }
  }
  const CompositionIndex idx(3, 5);
  Config last{5, 0, 0};
  CHECK(idx.rank(last) == idx.layer_size(5) - 1);
}

TEST_CASE("hand values") {
  const auto p4 = compute_table(path_graph(4), 3);
  CHECK(p4.value_at(std::vector<int>{0, 0, 0}) == 1.0);
  CHECK(p4.value_at(std::vector<int>{1, 0, 0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p4.value_at(std::vector<int>{1, 0, 1}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p4.value_at(std::vector<int>{1, 1, 1}) == doctest::Approx(7.0 / 16).epsilon(1e-15));
  const auto tri = compute_table(cycle_graph(3), 3);
  CHECK(tri.value_at(std::vector<int>{1, 1, 1}) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(code_of([&] { p4.value_at(std::vector<int>{2, 2, 1}); }) == Errc::LayerOutOfRange);
  CHECK(code_of([&] { p4.value_at(std::vector<int>{-1, 1, 1}); }) == Errc::NegativeEntry);
}

TEST_CASE("exact rational oracle agrees") {
  const Graph p4 = path_graph(4);
  CHECK(exact_value(p4, std::vector<int>{1, 1, 1}) == Rational(7, 16));
  CHECK(exact_value(cycle_graph(3), std::vector<int>{1, 1, 1}) == Rational(2, 3));
  const auto t = compute_table(p4, 8);
  for (const Config& c : all_configs(3, 8)) {
    const Rational r = exact_value(p4, c);
    CHECK(t.value_at(c) == doctest::Approx(boost::rational_cast<double>(r)).epsilon(1e-14));
  }
}

TEST_CASE("memo-free oracle on small graphs, totals up to 5") {
  for (const Graph& g : {path_graph(4), cycle_graph(3), star_graph(3), cycle_graph(4)}) {
    const auto pl = oracle::plain(g);
    const auto t = compute_table(g, 5);
    for (int n = 0; n <= 5; ++n)
      for (const Config& c : all_configs(g.edge_count(), n))
        CHECK(std::abs(t.value_at(c) - oracle::win_probability(pl, c)) <= 1e-12);
  }
}

TEST_CASE("weighted table matches the weighted oracle") {
  const Graph g = path_graph(4);
  const auto w = VertexWeights::from({0.1, 0.2, 0.3, 0.4});
  auto pl = oracle::plain(g);
  pl.p = {0.1, 0.2, 0.3, 0.4};
  const auto t = compute_table(g, 5, w);
  for (int n = 0; n <= 5; ++n)
    for (const Config& c : all_configs(3, n)) CHECK(std::abs(t.value_at(c) - oracle::win_probability(pl, c)) <= 1e-12);
}

TEST_CASE("optimal_move examples and table self-consistency") {
  const auto t = compute_table(path_graph(4), 30);
  CHECK(optimal_move(t, std::vector<int>{1, 1, 1}, 2) == 1);
  CHECK(!optimal_move(t, std::vector<int>{1, 0, 0}, 4));
  CHECK(optimal_move(t, std::vector<int>{2, 0, 0}, 1) == 0);

  const Graph& g = t.graph();
  for (int n = 1; n <= 30; ++n) {
    for (const Config& c : all_configs(3, n)) {
      double rhs = 0;
      for (int v = 1; v <= 4; ++v) {
        if (auto e = optimal_move(t, c, v)) {
          Config d = c;
          --d[static_cast<std::size_t>(*e)];
          rhs += t.weights()(v) * t.value_at(d);
        }
      }
      CHECK(t.value_at(c) == rhs);
      CHECK(t.value_at(c) >= 0);
      CHECK(t.value_at(c) <= 1);
    }
  }
  (void)g;
}

TEST_CASE("argmax_config") {
  const auto t = compute_table(path_graph(4), 200);
  const ConfigValue best = argmax_config(t, 200);
  CHECK(best.value == doctest::Approx(0.2583299).epsilon(5e-7 / 0.2583299));
  const ConfigValue zero = argmax_config(t, 0);
  CHECK(zero.value == 1.0);
  CHECK(zero.config == Config{0, 0, 0});
  // Layer 2 by brute force: lexicographically smallest maximizer.
  ConfigValue brute{{}, -1};
  for (const Config& c : all_configs(3, 2)) {
    const double p = t.value_at(c);
    if (p > brute.value || (p == brute.value && c < brute.config)) brute = {c, p};
  }
  const ConfigValue two = argmax_config(t, 2);
  CHECK(two.config == brute.config);
  CHECK(two.value == brute.value);
}

TEST_CASE("slices") {
  const auto t = compute_table(path_graph(4), 200);
  const Geometry geo(path_graph(4));
  // Slice II is empty for small n when A is large.
  CHECK(!slice_max(t, 4, SliceSpec{10, SliceKind::II}));
  const auto two = slice_max(t, 200, SliceSpec{1, SliceKind::II});
  REQUIRE(two);
  CHECK(two->value <= argmax_config(t, 200).value);
  const auto one = slice_max(t, 100, SliceSpec{2, SliceKind::I});
  REQUIRE(one);
  std::vector<double> counts(one->config.begin(), one->config.end());
  CHECK(geo.min_critical_l(counts, 100) <= -20 + 1e-12);
  // The three slices cover the layer.
  const double best = argmax_config(t, 100).value;
  double cover = 0;
  for (SliceKind k : {SliceKind::I, SliceKind::II, SliceKind::III})
    if (auto s = slice_max(t, 100, SliceSpec{1.5, k})) cover = std::max(cover, s->value);
  CHECK(cover == best);
  CHECK_THROWS_AS(slice_max(t, 100, SliceSpec{0, SliceKind::I}), Error);
}

TEST_CASE("memory budget and streaming") {
  EngineOptions tiny;
  tiny.memory_budget = 1024;
  CHECK(code_of([&] { compute_table(path_graph(4), 200, VertexWeights::uniform(4), tiny); }) ==
        Errc::MemoryBudgetExceeded);
  const auto full = compute_table(path_graph(4), 60);
  const auto last = compute_final_layer(path_graph(4), 60, VertexWeights::uniform(4));
  const auto layer = full.layer(60);
  REQUIRE(last.size() == layer.size());
  for (std::size_t i = 0; i < last.size(); ++i) CHECK(last[i] == layer[i]);
}

TEST_CASE("threaded layers are bit-identical") {
  const Graph g = path_graph(5);
  EngineOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const auto a = compute_table(g, 60, VertexWeights::uniform(5), one);
  const auto b = compute_table(g, 60, VertexWeights::uniform(5), four);
  for (int t = 0; t <= 60; ++t) {
    const auto la = a.layer(t), lb = b.layer(t);
    CHECK(std::equal(la.begin(), la.end(), lb.begin()));
  }
  // Recomputing one layer from the stored previous layer.
  std::vector<double> again(a.layer(60).size());
  compute_layer(g, a.weights(), a.index(), 60, a.layer(59), again, 3);
  CHECK(std::equal(again.begin(), again.end(), a.layer(60).begin()));
}

TEST_CASE("cache round trip and failures") {
  const Graph g = path_graph(4);
  const auto t = compute_table(g, 20);
  const std::string path = temp_path("cache.bin");
  save_table(t, path);
  const auto back = load_table(path, g);
  CHECK(back.n_max() == 20);
  for (int n = 0; n <= 20; ++n) {
    const auto a = t.layer(n), b = back.layer(n);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }
  CHECK(code_of([&] { load_table(path, star_graph(3)); }) == Errc::GraphHashMismatch);
  CHECK(code_of([&] { load_table(path, g, 19); }) == Errc::FormatMismatch);

  const std::string streamed = temp_path("streamed.bin");
  compute_table_to_file(g, 20, VertexWeights::uniform(4), streamed);
  std::ifstream a(path, std::ios::binary), b(streamed, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);

  std::filesystem::resize_file(streamed, std::filesystem::file_size(streamed) - 5);
  CHECK(code_of([&] { load_table(streamed, g); }) == Errc::FormatMismatch);
  {
    std::ofstream bad(streamed, std::ios::binary | std::ios::trunc);
    bad << "NOPE";
  }
  CHECK(code_of([&] { load_table(streamed, g); }) == Errc::FormatMismatch);
  CHECK(code_of([&] { load_table(temp_path("missing.bin"), g); }) == Errc::IoFailure);
  std::filesystem::remove(path);
  std::filesystem::remove(streamed);
}
