#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "motifcnn/errors.hpp"
#include "motifcnn/graph.hpp"
#include "motifcnn/synth.hpp"
#include "test_util.hpp"

using namespace motifcnn;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in);
}

template <typename E>
std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const E& e) {
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST(HeteroGraph, PathDegrees) {
  const Dataset d = parse("N 3\nEDGE 0 1\nEDGE 1 2\n");
  EXPECT_EQ(d.graph.num_nodes(), 3u);
  EXPECT_EQ(d.graph.degree(0), 1u);
  EXPECT_EQ(d.graph.degree(1), 2u);
  EXPECT_EQ(d.graph.degree(2), 1u);
  EXPECT_TRUE(d.graph.has_edge(2, 1));
  EXPECT_FALSE(d.graph.has_edge(0, 2));
}

TEST(HeteroGraph, OutOfRangeEdgeNamesLine) {
  const auto msg = error_of<ValidationError>("N 3\nEDGE 0 1\nEDGE 0 5\n");
  EXPECT_NE(msg.find("node index out of range"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(HeteroGraph, RejectsSelfLoopsAndDuplicates) {
  EXPECT_NE(error_of<ValidationError>("N 3\nEDGE 1 1\n").find("self-loop"), std::string::npos);
  EXPECT_NE(error_of<ValidationError>("N 3\nEDGE 0 1\nEDGE 1 0\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of<ValidationError>("N 3\nEDGE 0 1 directed\nEDGE 0 1\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of<ValidationError>("N 3\nEDGE 0 1 directed\nEDGE 0 1 directed\n").find("duplicate"),
            std::string::npos);
  // Opposite directions are two different links.
  EXPECT_NO_THROW(parse("N 3\nEDGE 0 1 directed\nEDGE 1 0 directed\n"));
}

TEST(HeteroGraph, DirectedNeighborKinds) {
  const Dataset d = parse("N 3\nEDGE 0 1 directed\nEDGE 2 1\n");
  const auto& g = d.graph;
  EXPECT_TRUE(g.has_edge(0, 1, LinkKind::Out));
  EXPECT_FALSE(g.has_edge(1, 0, LinkKind::Out));
  EXPECT_TRUE(g.has_edge(1, 0, LinkKind::In));
  EXPECT_TRUE(g.has_edge(1, 0, LinkKind::Any));
  EXPECT_TRUE(g.has_edge(1, 2, LinkKind::Undirected));
  const auto any = g.neighbors(1, LinkKind::Any);
  EXPECT_EQ(std::vector<NodeId>(any.begin(), any.end()), (std::vector<NodeId>{0, 2}));
}

TEST(HeteroGraph, DegreeSumCountsEachLinkTwice) {
  const HeteroGraph g = random_typed_graph(25, 0.3, 2, 0.5, 11);
  std::size_t sum = 0, undirected = 0, directed = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) sum += g.degree(v);
  for (const auto& e : g.edges()) (e.directed ? directed : undirected)++;
  EXPECT_EQ(sum, 2 * undirected + 2 * directed);
}

TEST(ParseDataset, MalformedInputsNameTheLine) {
  EXPECT_NE(error_of<ParseError>("N 2\nEDGE 0\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of<ParseError>("EDGE 0 1\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of<ParseError>("N 2\nBOGUS\n").find("unknown record"), std::string::npos);
  EXPECT_NE(error_of<ParseError>("N 2\nTYPES a b\nNODE 0 c\n").find("unknown node type"), std::string::npos);
  EXPECT_NE(error_of<ParseError>("N 2\nLABEL 0 1\n").find("TASK"), std::string::npos);
  EXPECT_NE(error_of<ValidationError>("N 2\nTASK multiclass 2\nLABEL 0 2\n").find("class index"),
            std::string::npos);
  EXPECT_NE(error_of<ValidationError>("N 2\nTYPES a b\nNODE 0 a\n").find("no NODE record"), std::string::npos);
}

TEST(ParseDataset, CommentsFeaturesAndLabels) {
  const Dataset d = parse(
      "# toy\nN 3\nTYPES a b\nTASK multilabel 3\nNODE 0 a\nNODE 1 b  # trailing\nNODE 2 a\n"
      "EDGE 0 1\nFEAT a 2\n0 1.5 -2\n2 0 3\nLABEL 0 0,2\nLABEL 1 -\n");
  EXPECT_EQ(d.graph.types().size(), 2u);
  EXPECT_EQ(d.labels.task, Task::MultiLabel);
  EXPECT_EQ(d.labels.classes.at(0), (std::vector<std::uint32_t>{0, 2}));
  EXPECT_TRUE(d.labels.classes.at(1).empty());
  const FeatureMatrix x = d.feature_matrix();
  // Type a: 2 supplied columns; type b: one-hot over its single node.
  EXPECT_EQ(x.data.cols(), 3u);
  EXPECT_EQ(x.data(0, 0), 1.5);
  EXPECT_EQ(x.data(2, 1), 3.0);
  EXPECT_EQ(x.data(1, 2), 1.0);
  EXPECT_TRUE(x.slices[1].one_hot);
}

TEST(ParseDataset, RoundTripIsExact) {
  PlantedHeteroConfig pc;
  pc.authors = 20;
  pc.noise = 0.3;
  const Dataset d = planted_hetero(pc);
  std::ostringstream out;
  write_dataset(out, d);
  std::istringstream in(out.str());
  const Dataset back = parse_dataset(in);
  EXPECT_EQ(back, d);
  std::ostringstream again;
  write_dataset(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(ParseDataset, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "motifcnn_graph_roundtrip.txt";
  const HeteroGraph g = random_typed_graph(15, 0.3, 3, 0.4, 5);
  save_dataset(path.string(), Dataset{g, {}, {}});
  EXPECT_EQ(load_graph(path.string()), g);
  std::filesystem::remove(path);
}

TEST(FeatureMatrix, TwoTypesArePadded) {
  const HeteroGraph g(TypeRegistry({"a", "b"}), {NodeTypeId{0}, NodeTypeId{1}}, {});
  TypeFeatures fa{{0}, DenseMatrix(1, 2, 1.0)};
  TypeFeatures fb{{1}, DenseMatrix(1, 3, 2.0)};
  const FeatureMatrix x = build_feature_matrix(g, {{NodeTypeId{0}, fa}, {NodeTypeId{1}, fb}});
  ASSERT_EQ(x.data.rows(), 2u);
  ASSERT_EQ(x.data.cols(), 5u);
  for (std::size_t c = 0; c < 5; ++c) {
    EXPECT_EQ(x.data(0, c), c < 2 ? 1.0 : 0.0);
    EXPECT_EQ(x.data(1, c), c < 2 ? 0.0 : 2.0);
  }
}

TEST(FeatureMatrix, SingleTypeIsUnchanged) {
  std::mt19937_64 rng(1);
  const HeteroGraph g = testutil::plain_graph(4, {{0, 1}});
  TypeFeatures f{{0, 1, 2, 3}, testutil::random_dense(4, 3, rng)};
  EXPECT_EQ(build_feature_matrix(g, {{NodeTypeId{0}, f}}).data, f.block);
}

TEST(FeatureMatrix, FeaturelessTypeGetsOneHot) {
  const HeteroGraph g(TypeRegistry({"a", "b"}), {NodeTypeId{1}, NodeTypeId{0}, NodeTypeId{1}}, {});
  TypeFeatures fa{{1}, DenseMatrix(1, 1, 7.0)};
  const FeatureMatrix x = build_feature_matrix(g, {{NodeTypeId{0}, fa}});
  ASSERT_EQ(x.data.cols(), 3u);
  EXPECT_EQ(x.slices[1].width, 2u);
  EXPECT_EQ(x.data(0, 1), 1.0);
  EXPECT_EQ(x.data(2, 2), 1.0);
  EXPECT_EQ(x.data(0, 2), 0.0);
  EXPECT_EQ(x.data(1, 0), 7.0);
}

TEST(FeatureMatrix, MissingNodeIsRejected) {
  const HeteroGraph g = testutil::plain_graph(3, {});
  TypeFeatures f{{0, 2}, DenseMatrix(2, 1)};
  EXPECT_THROW(build_feature_matrix(g, {{NodeTypeId{0}, f}}), ValidationError);
}

TEST(FeatureMatrix, ZeroOutsideOwnSlice) {
  PlantedHeteroConfig pc;
  pc.authors = 12;
  pc.noise = 1.0;
  const Dataset d = planted_hetero(pc);
  const FeatureMatrix x = d.feature_matrix();
  for (NodeId v = 0; v < d.graph.num_nodes(); ++v) {
    const FeatureSlice s = x.slices[d.graph.type_of(v).value];
    for (std::size_t c = 0; c < x.data.cols(); ++c) {
      if (c < s.begin || c >= s.begin + s.width) {
        EXPECT_EQ(x.data(v, c), 0.0);
      }
    }
  }
}

namespace {

Labels class_labels(std::size_t n, std::size_t classes) {
  Labels l;
  l.num_classes = classes;
  for (NodeId v = 0; v < n; ++v) l.classes[v] = {static_cast<std::uint32_t>(v % classes)};
  return l;
}

}  // namespace

TEST(SplitLabels, HundredNodeCounts) {
  const LabelSet s = split_labels(class_labels(100, 4), {0.2, 0.1}, 3);
  EXPECT_EQ(s.nodes(Split::Train).size(), 20u);
  EXPECT_EQ(s.nodes(Split::Validation).size(), 10u);
  EXPECT_EQ(s.nodes(Split::Test).size(), 70u);
}

TEST(SplitLabels, DeterministicPerSeed) {
  const Labels l = class_labels(60, 3);
  EXPECT_EQ(split_labels(l, {0.2, 0.1}, 9).split, split_labels(l, {0.2, 0.1}, 9).split);
  EXPECT_NE(split_labels(l, {0.2, 0.1}, 9).split, split_labels(l, {0.2, 0.1}, 10).split);
}

TEST(SplitLabels, StratifiedOnePerClass) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LabelSet s = split_labels(class_labels(10, 2), {0.2, 0.1}, seed);
    std::size_t per_class[2] = {0, 0};
    for (const NodeId v : s.nodes(Split::Train)) per_class[v % 2]++;
    EXPECT_EQ(per_class[0], 1u);
    EXPECT_EQ(per_class[1], 1u);
  }
}

TEST(SplitLabels, ClassWithoutTrainingNodeIsAnError) {
  Labels l = class_labels(10, 2);
  l.num_classes = 3;
  l.classes[9] = {2};
  EXPECT_THROW(split_labels(l, {0.2, 0.1}, 1), ValidationError);
}

TEST(SplitLabels, UnlabeledNodesHaveNoSplit) {
  Labels l;
  l.num_classes = 2;
  for (NodeId v = 0; v < 20; v += 2) l.classes[v] = {v % 4 == 0 ? 0u : 1u};
  const LabelSet s = split_labels(l, {0.2, 0.1}, 1);
  for (NodeId v = 1; v < 20; v += 2) EXPECT_EQ(s.split_of(v), Split::None);
  for (NodeId v = 0; v < 20; v += 2) EXPECT_NE(s.split_of(v), Split::None);
}

TEST(Synth, PlantedHeteroSchema) {
  const Dataset d = planted_hetero({});
  const auto& g = d.graph;
  const NodeTypeId a = *g.types().find("A"), p = *g.types().find("P"), v = *g.types().find("V");
  for (const auto& e : g.edges()) {
    const NodeTypeId s = g.type_of(e.src), t = g.type_of(e.dst);
    const bool ap = (s == a && t == p) || (s == p && t == a);
    const bool pv = (s == p && t == v) || (s == v && t == p);
    const bool pp = s == p && t == p;
    EXPECT_TRUE(ap || pv || pp);
    EXPECT_EQ(pp, e.directed);
    EXPECT_FALSE(s == a && t == a);
  }
}

TEST(Synth, PlantedHeteroNoiseFreeLabelsFollowVenueMajority) {
  PlantedHeteroConfig pc;
  pc.authors = 80;
  const Dataset d = planted_hetero(pc);
  const auto& g = d.graph;
  const FeatureMatrix x = d.feature_matrix();
  const NodeTypeId venue = *g.types().find("V");
  const FeatureSlice vs = x.slices[venue.value];
  for (const auto& [author, cls] : d.labels.classes) {
    std::vector<int> votes(pc.classes, 0);
    for (const NodeId paper : g.neighbors(author)) {
      for (const NodeId w : g.neighbors(paper)) {
        if (g.type_of(w) != venue) continue;
        for (std::size_t c = 0; c < pc.classes; ++c) votes[c] += x.data(w, vs.begin + c) == 1.0;
      }
    }
    const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
    EXPECT_EQ(static_cast<std::uint32_t>(best), cls.at(0));
    EXPECT_EQ(std::count(votes.begin(), votes.end(), votes[best]), 1);
  }
}

TEST(Synth, FixedSeedGivesIdenticalBytes) {
  auto text = [](const Dataset& d) {
    std::ostringstream s;
    write_dataset(s, d);
    return s.str();
  };
  PlantedHeteroConfig pc;
  pc.noise = 0.5;
  EXPECT_EQ(text(planted_hetero(pc)), text(planted_hetero(pc)));
  EXPECT_EQ(text(sbm_homo({})), text(sbm_homo({})));
  SbmConfig other;
  other.seed = 2;
  EXPECT_NE(text(sbm_homo({})), text(sbm_homo(other)));
}

TEST(Synth, SbmTrianglesConcentrateInsideBlocks) {
  SbmConfig sc;
  sc.nodes = 200;
  sc.p_in = 0.2;
  sc.p_out = 0.02;
  const Dataset d = sbm_homo(sc);
  const auto& g = d.graph;
  // Brute-force triple census.
  std::size_t inside = 0, across = 0;
  const std::size_t n = g.num_nodes();
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) {
      if (!g.has_edge(a, b)) continue;
      for (NodeId c = b + 1; c < n; ++c) {
        if (!g.has_edge(a, c) || !g.has_edge(b, c)) continue;
        const bool same = (a < n / 2) == (b < n / 2) && (b < n / 2) == (c < n / 2);
        (same ? inside : across)++;
      }
    }
  const double half = static_cast<double>(n / 2);
  const double inside_triples = 2.0 * half * (half - 1) * (half - 2) / 6.0;
  const double all_triples = static_cast<double>(n) * (n - 1) * (n - 2) / 6.0;
  EXPECT_GT(inside / inside_triples, across / (all_triples - inside_triples));
}

TEST(Synth, InvalidSizesThrow) {
  PlantedHeteroConfig pc;
  pc.authors = 0;
  EXPECT_THROW(planted_hetero(pc), std::invalid_argument);
  SbmConfig sc;
  sc.p_in = 1.5;
  EXPECT_THROW(sbm_homo(sc), std::invalid_argument);
  EXPECT_THROW(erdos_renyi_gnm(4, 7, 1), std::invalid_argument);
}

TEST(Synth, GnmHasExactEdgeCount) {
  const HeteroGraph g = erdos_renyi_gnm(100, 300, 4);
  EXPECT_EQ(g.num_edges(), 300u);
}
