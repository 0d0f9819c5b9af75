#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "effortprop/heap.hpp"
#include "effortprop/ingest.hpp"

using namespace effortprop;

namespace {

const Project& fixture() {
  static Project project =
      load_project(std::filesystem::path(EFFORTPROP_DATA_DIR) /
                   "high_school.json");
  return project;
}

const std::vector<StrategicPath>& fixture_paths() {
  static std::vector<StrategicPath> paths = enumerate_paths(fixture().system);
  return paths;
}

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

// three singleton blocks A -> B -> C
struct ChainSystem {
  FactorSystem system{{{"A", "", true, {1, 1}, false},
                       {"B", "", true, {2, 1}, false},
                       {"C", "", true, {3, 1}, false}}};
  SignificanceVector nsig{{{"A", 0.2}, {"B", 0.3}, {"C", 0.5}}, {}};
  // d(A,B)=0.5, d(B,C)=0.4, d(A,C)=0.1
  Matrix ndim = from_rows({{0.0, 0.5, 0.1}, {0.0, 0.0, 0.4}, {0.0, 0.0, 0.0}});
};

}  // namespace

TEST_CASE("case study enumeration yields three paths in a fixed order") {
  const auto& paths = fixture_paths();
  REQUIRE(paths.size() == 3);
  const Level shared{1, 2};  // the only sublevel with two members
  CHECK(paths[0].selection.at(shared) == std::vector<std::string>{"Schol"});
  CHECK(paths[1].selection.at(shared) == std::vector<std::string>{"Int"});
  CHECK(paths[2].selection.at(shared) ==
        std::vector<std::string>{"Schol", "Int"});
  CHECK(paths[0].index == 1);
  CHECK(paths[2].index == 3);

  // bottom block members come out in ascending sublevel order
  REQUIRE(!paths[0].blocks.empty());
  CHECK(paths[0].blocks.front().members ==
        std::vector<std::string>{"Schol", "Funds", "Cocurr", "Doubt"});
  CHECK(paths[0].contains("Schol"));
  CHECK_FALSE(paths[0].contains("Int"));
  CHECK_FALSE(paths[0].contains("NStaff"));  // excluded factors never appear
}

TEST_CASE("every case study path has six effective blocks") {
  for (const auto& path : fixture_paths()) {
    CHECK(path.effective_blocks == std::vector<int>{1, 2, 3, 4, 6, 7});
    CHECK(effective_blocks(fixture().system, path).size() == 6);
  }
}

TEST_CASE("path enumeration guards against combinatorial blowups") {
  std::vector<Factor> wide;
  for (int i = 0; i < 21; ++i)
    wide.push_back({"W" + std::to_string(i), "", true, {1, 1}, false});
  CHECK_THROWS_AS(enumerate_paths(FactorSystem(wide)), Error);

  FactorSystem two_pairs({{"A", "", true, {1, 1}, false},
                          {"B", "", true, {1, 1}, false},
                          {"C", "", true, {2, 1}, false},
                          {"D", "", true, {2, 1}, false}});
  CHECK(enumerate_paths(two_pairs).size() == 9);
  CHECK_THROWS_AS(enumerate_paths(two_pairs, 5), Error);
}

TEST_CASE("ascending influence closes over strictly block-ascending chains") {
  ChainSystem chain;
  const auto paths = enumerate_paths(chain.system);
  REQUIRE(paths.size() == 1);
  const auto influence = ascending_influence(chain.system, paths[0], chain.ndim);
  CHECK(influence.at("A", "B") == Catch::Approx(0.5));
  CHECK(influence.at("B", "C") == Catch::Approx(0.4));
  // d(A,C) + d(A,B) * d(B,C)
  CHECK(influence.at("A", "C") == Catch::Approx(0.1 + 0.5 * 0.4).margin(1e-15));
  CHECK_FALSE(influence.contains("C", "A"));
  CHECK_THROWS_AS(influence.at("C", "A"), Error);
}

TEST_CASE("same-block pairs reduce to the direct influence entry") {
  FactorSystem system({{"A", "", true, {1, 1}, false},
                       {"B", "", true, {1, 2}, false},
                       {"C", "", true, {2, 1}, false}});
  Matrix ndim = from_rows({{0.0, 0.3, 0.2}, {0.0, 0.0, 0.4}, {0.0, 0.0, 0.0}});
  const auto paths = enumerate_paths(system);
  const auto influence = ascending_influence(system, paths[0], ndim);
  CHECK(influence.at("A", "B") == 0.3);  // same block: no chain, just the edge
  // B is not strictly between the blocks of A and C, so no A->B->C chain
  CHECK(influence.at("A", "C") == 0.2);
}

TEST_CASE("case study ascending influence matches the pinned chain values") {
  const auto& project = fixture();
  const auto influence =
      ascending_influence(project.system, fixture_paths()[0], project.ndim);
  CHECK(influence.at("TeachSat", "StudSat") ==
        Catch::Approx(0.065971).margin(1e-12));
  CHECK(influence.at("NStud", "TeachSat") ==
        Catch::Approx(0.062691).margin(1e-12));
  CHECK(influence.at("NStud", "StudSat") ==
        Catch::Approx(0.068104).margin(1e-12));
}

TEST_CASE("unit propagation factors reproduce the pinned chain") {
  const auto& project = fixture();
  const auto& path = fixture_paths()[0];
  const auto influence = ascending_influence(project.system, path, project.ndim);
  const auto factors = uepf(project.system, path, influence, project.nsig);
  CHECK(factors.at("StudSat") == 0.221834);  // topmost: exactly its nsig
  CHECK(factors.at("TeachSat") == Catch::Approx(0.180271).margin(1e-4));
  CHECK(factors.at("NStud") == Catch::Approx(0.154580).margin(1e-4));
  for (const auto& [id, value] : factors)
    CHECK(value >= project.nsig.at(id));  // indirect part is nonnegative
}

TEST_CASE("within-block propagation widens the upper set but not d-prime") {
  FactorSystem system({{"A", "", true, {1, 1}, false},
                       {"B", "", false, {1, 2}, false}});
  SignificanceVector nsig{{{"A", 0.4}, {"B", 0.6}}, {}};
  Matrix ndim = from_rows({{0.0, 0.5}, {0.0, 0.0}});
  const auto paths = enumerate_paths(system);
  const auto influence = ascending_influence(system, paths[0], ndim);
  CHECK(influence.at("A", "B") == 0.5);  // present regardless of the flag

  const auto off = uepf(system, paths[0], influence, nsig);
  CHECK(off.at("A") == 0.4);  // later sublevel ignored by default

  const HeapConfig on{true, 1.0};
  const auto widened = uepf(system, paths[0], influence, nsig, on);
  CHECK(widened.at("A") == Catch::Approx(0.4 + 0.5 * 0.6).margin(1e-15));
  CHECK(widened.at("B") == 0.6);
}

TEST_CASE("block shares follow the selected heuristic") {
  const auto& project = fixture();
  const auto& path = fixture_paths()[0];

  const auto uniform =
      block_shares(project.system, path, BlockHeuristic::Uni, project.nsig);
  REQUIRE(uniform.size() == 6);
  for (const auto& [block, share] : uniform) {
    (void)block;
    CHECK(share == Catch::Approx(1.0 / 6.0).margin(1e-15));
  }
  CHECK(uniform.count(5) == 0);  // latent-only blocks receive nothing
  CHECK(uniform.count(8) == 0);
  CHECK(uniform.count(9) == 0);

  const auto bsr =
      block_shares(project.system, path, BlockHeuristic::Bsr, project.nsig);
  const std::map<int, double> expected = {{1, 0.110510}, {2, 0.205672},
                                          {3, 0.104451}, {4, 0.128953},
                                          {6, 0.198956}, {7, 0.251458}};
  REQUIRE(bsr.size() == 6);
  double sum = 0.0;
  for (const auto& [block, share] : expected) {
    CHECK(bsr.at(block) == Catch::Approx(share).margin(1e-5));
    sum += bsr.at(block);
  }
  CHECK(sum == Catch::Approx(1.0).margin(1e-6));

  CHECK_THROWS_AS(
      block_shares(project.system, path, BlockHeuristic::Bepr, project.nsig),
      Error);
}

TEST_CASE("uniform-block significance-weighted efforts match the pinned split") {
  const auto& project = fixture();
  const auto& path = fixture_paths()[0];
  const auto assignment =
      heap_assignment(project.system, path,
                      {BlockHeuristic::Uni, UnitHeuristic::NSig}, project.nsig);
  CHECK(assignment.at("Schol") == Catch::Approx(0.024659).margin(1e-5));
  CHECK(assignment.at("Funds") == Catch::Approx(0.032820).margin(1e-5));
  CHECK(assignment.at("Cocurr") == Catch::Approx(0.046676).margin(1e-5));
  CHECK(assignment.at("Doubt") == Catch::Approx(0.062512).margin(1e-5));
  CHECK(assignment.sum() == Catch::Approx(1.0).margin(1e-12));
  CHECK_NOTHROW(check_assignment(project.system, assignment));
}

TEST_CASE("significance-weighted block and unit shares compose") {
  const auto& project = fixture();
  const auto& path = fixture_paths()[0];
  const auto assignment =
      heap_assignment(project.system, path,
                      {BlockHeuristic::Bsr, UnitHeuristic::NSig}, project.nsig);
  // block share 0.110510 split by nsig ratio 0.008334 / 0.056328
  CHECK(assignment.at("Schol") == Catch::Approx(0.016351).margin(2e-5));
  CHECK(assignment.sum() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("propagation-weighted heuristics require the unit factors") {
  const auto& project = fixture();
  const auto& path = fixture_paths()[0];
  CHECK_THROWS_AS(
      heap_assignment(project.system, path,
                      {BlockHeuristic::Uni, UnitHeuristic::Uepf}, project.nsig),
      Error);
  CHECK_THROWS_AS(
      heap_assignment(project.system, path,
                      {BlockHeuristic::Bepr, UnitHeuristic::Uni}, project.nsig),
      Error);
}

TEST_CASE("block effort propagation sums effort times unit factor") {
  ChainSystem chain;
  const auto paths = enumerate_paths(chain.system);
  EffortAssignment assignment;
  assignment.total = 0.3;
  assignment.efforts = {{"A", 0.1}, {"B", 0.2}};
  const std::map<std::string, double> unit = {
      {"A", 0.2}, {"B", 0.1}, {"C", 0.7}};
  const auto bep =
      block_effort_propagation(chain.system, paths[0], assignment, unit);
  CHECK(bep.at(1) == Catch::Approx(0.1 * 0.2));
  CHECK(bep.at(2) == Catch::Approx(0.2 * 0.1));
  CHECK(bep.at(3) == 0.0);  // no effort landed there
  CHECK(heap_total_epi(chain.system, paths[0], assignment, unit) ==
        Catch::Approx(0.04).margin(1e-15));
}

TEST_CASE("case study block propagation matches the unit factor chain") {
  const auto& project = fixture();
  const auto& path = fixture_paths()[0];
  const auto influence = ascending_influence(project.system, path, project.ndim);
  const auto factors = uepf(project.system, path, influence, project.nsig);
  const auto assignment =
      heap_assignment(project.system, path,
                      {BlockHeuristic::Uni, UnitHeuristic::Uni}, project.nsig);
  const auto bep = block_effort_propagation(project.system, path, assignment,
                                            factors);
  // the top block holds one factor on one sixth of the budget
  CHECK(bep.at(7) == Catch::Approx(0.154580 / 6.0).margin(1e-5));
  double total = 0.0;
  for (const auto& [block, value] : bep) {
    (void)block;
    total += value;
  }
  CHECK(heap_total_epi(project.system, path, assignment, factors) ==
        Catch::Approx(total).margin(1e-15));
}

TEST_CASE("full hierarchical evaluation tags its strategy") {
  const auto& project = fixture();
  const auto result = evaluate_heap(project.system, project.nsig, project.ndim,
                                    fixture_paths()[2],
                                    {BlockHeuristic::Bsr, UnitHeuristic::Uepf});
  CHECK(result.tag.family == StrategyFamily::Heap);
  CHECK(result.tag.block == BlockHeuristic::Bsr);
  CHECK(result.tag.unit == UnitHeuristic::Uepf);
  CHECK(result.tag.path == 3);
  CHECK(result.tag.heuristics_text() == "(BSR, UEPF)");
  REQUIRE(result.uepf.has_value());
  CHECK(result.assignment.sum() == Catch::Approx(1.0).margin(1e-12));
  CHECK(result.total_epi > 0.0);
}

TEST_CASE("evaluation is invariant under factor declaration order") {
  std::vector<Factor> forward = {{"F1", "", true, {1, 1}, false},
                                 {"F2", "", true, {1, 2}, false},
                                 {"F3", "", false, {2, 1}, false},
                                 {"F4", "", true, {3, 1}, false},
                                 {"F5", "", false, {4, 1}, false}};
  Matrix ndim = from_rows({{0.00, 0.12, 0.20, 0.15, 0.08},
                           {0.05, 0.00, 0.25, 0.10, 0.12},
                           {0.02, 0.03, 0.00, 0.30, 0.22},
                           {0.01, 0.02, 0.04, 0.00, 0.40},
                           {0.03, 0.01, 0.02, 0.05, 0.00}});
  SignificanceVector nsig{{{"F1", 0.1}, {"F2", 0.15}, {"F3", 0.2},
                           {"F4", 0.25}, {"F5", 0.3}},
                          {}};

  const std::vector<std::size_t> perm = {3, 1, 4, 0, 2};
  std::vector<Factor> shuffled;
  Matrix permuted(5, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    shuffled.push_back(forward[perm[i]]);
    for (std::size_t j = 0; j < 5; ++j)
      permuted(i, j) = ndim(perm[i], perm[j]);
  }

  FactorSystem sys_a(forward);
  FactorSystem sys_b(shuffled);
  const auto paths_a = enumerate_paths(sys_a);
  const auto paths_b = enumerate_paths(sys_b);
  REQUIRE(paths_a.size() == 1);
  REQUIRE(paths_b.size() == 1);

  for (BlockHeuristic block :
       {BlockHeuristic::Uni, BlockHeuristic::Bsr, BlockHeuristic::Bepr})
    for (UnitHeuristic unit :
         {UnitHeuristic::Uni, UnitHeuristic::NSig, UnitHeuristic::Uepf}) {
      const auto a = evaluate_heap(sys_a, nsig, ndim, paths_a[0], {block, unit});
      const auto b =
          evaluate_heap(sys_b, nsig, permuted, paths_b[0], {block, unit});
      CHECK(a.total_epi == Catch::Approx(b.total_epi).margin(1e-12));
      for (const auto& [id, effort] : a.assignment.efforts)
        CHECK(effort == Catch::Approx(b.assignment.at(id)).margin(1e-12));
    }
}

TEST_CASE("paths with no accessible member are rejected") {
  FactorSystem latent({{"A", "", false, {1, 1}, false},
                       {"B", "", false, {2, 1}, false}});
  const auto paths = enumerate_paths(latent);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].effective_blocks.empty());
  CHECK_THROWS_AS(effective_blocks(latent, paths[0]), Error);
  SignificanceVector nsig{{{"A", 0.5}, {"B", 0.5}}, {}};
  CHECK_THROWS_AS(block_shares(latent, paths[0], BlockHeuristic::Uni, nsig),
                  Error);
}
