#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace temponet;

namespace {

CpModel two_column_model(const Eigen::MatrixXd& a, const Eigen::MatrixXd& t, std::vector<double> scales) {
    CpModel m;
    m.rank = static_cast<int>(scales.size());
    m.scales = std::move(scales);
    m.node_loadings = a;
    m.time_loadings = t;
    return m;
}

// Same partition up to a relabeling of cluster ids.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto [it, fresh] = ab.emplace(a[i], b[i]);
        if (!fresh && it->second != b[i]) return false;
        auto [jt, fresh2] = ba.emplace(b[i], a[i]);
        if (!fresh2 && jt->second != a[i]) return false;
    }
    return true;
}

DynTensor two_cliques(int horizon, std::vector<int> skip = {}) {
    std::vector<EdgeEvent> ev;
    for (int t = 0; t < horizon; ++t) {
        if (std::find(skip.begin(), skip.end(), t) != skip.end()) continue;
        for (int i = 0; i < 6; ++i)
            for (int j = i + 1; j < 6; ++j) {
                ev.push_back({i, j, t, 1.0});
                ev.push_back({i + 6, j + 6, t, 1.0});
            }
        ev.push_back({0, 6, t, 0.1});
    }
    return from_edge_events(ev, 12, horizon, false);
}

} // namespace

TEST(BcRankedList, CleanSeparation) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(10, 1);
    for (int i = 0; i < 5; ++i) a(i, 0) = 1.0;
    const auto list = bc_ranked_list(two_column_model(a, Eigen::MatrixXd::Ones(3, 1), {1.0}));
    ASSERT_EQ(list.size(), 2u);
    EXPECT_EQ(list[0].part, 1);
    EXPECT_EQ(list[0].record.members, fixtures::range(0, 5));
    EXPECT_EQ(list[1].record.members, fixtures::range(5, 10));
}

TEST(BcRankedList, ZeroComponentHasEmptyInSet) {
    const auto list = bc_ranked_list(two_column_model(Eigen::MatrixXd::Zero(4, 1), Eigen::MatrixXd::Zero(2, 1), {0.0}));
    ASSERT_EQ(list.size(), 2u);
    EXPECT_TRUE(list[0].record.members.empty());
    EXPECT_EQ(list[1].record.members, fixtures::range(0, 4));
}

TEST(BcRankedList, OrderedByComponentNorm) {
    // Unit-norm columns, so the component norm is lambda * |a|^2 * |t| = lambda.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 2);
    a(0, 0) = a(1, 0) = std::sqrt(0.5);
    a(2, 1) = a(3, 1) = std::sqrt(0.5);
    const Eigen::MatrixXd t = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd swapped = a(Eigen::all, std::vector<int>{1, 0});
    const std::vector<std::vector<int>> expected{{2, 3}, {0, 1}, {0, 1}, {2, 3}};
    for (const auto& model : {two_column_model(a, t, {2.0, 10.0}), two_column_model(swapped, t, {10.0, 2.0})}) {
        const auto list = bc_ranked_list(model);
        ASSERT_EQ(list.size(), 4u);
        EXPECT_NEAR(list[0].component_norm, 10.0, 1e-12);
        EXPECT_NEAR(list[1].component_norm, 2.0, 1e-12);
        for (std::size_t k = 0; k < 4; ++k) {
            EXPECT_EQ(list[k].part, k < 2 ? 1 : 2);
            EXPECT_EQ(list[k].record.members, expected[k]);
            EXPECT_EQ(list[k].record.rank_position, static_cast<int>(k) + 1);
        }
    }
}

TEST(BcRankedListProperty, PartsPartitionNodes) {
    Rng rng(61);
    const auto model = two_column_model(fixtures::random_nonneg(9, 3, rng), fixtures::random_nonneg(4, 3, rng), {3.0, 2.0, 1.0});
    const auto list = bc_ranked_list(model, 0.6);
    for (int r = 0; r < 3; ++r) {
        std::vector<int> all;
        for (const auto& c : list)
            if (c.record.model_index == r) all.insert(all.end(), c.record.members.begin(), c.record.members.end());
        std::sort(all.begin(), all.end());
        EXPECT_EQ(all, fixtures::range(0, 9));
    }
    EXPECT_THROW(bc_ranked_list(model, 1.0), InvalidArgument);
}

TEST(EcClustering, SeparatesPlantedCliques) {
    EcConfig cfg;
    cfg.k = 2;
    cfg.seed = 4;
    const auto labels = ec_clustering(two_cliques(6), cfg);
    ASSERT_EQ(labels.size(), 6u);
    std::vector<int> truth(12, 0);
    for (int i = 6; i < 12; ++i) truth[i] = 1;
    for (const auto& l : labels) EXPECT_TRUE(same_partition(l, truth));
}

TEST(EcClustering, ZeroBlendIgnoresHistory) {
    // Same snapshot at t = 3, different history.
    const auto a = two_cliques(4);
    std::vector<EdgeEvent> ev;
    for (int t = 0; t < 3; ++t)
        for (int i = 0; i < 12; ++i) ev.push_back({i, (i + 1) % 12, t, 1.0});
    for (const auto& e : a.slice(3)) ev.push_back({e.i, e.j, 3, e.value});
    const auto b = from_edge_events(ev, 12, 4, false);
    EcConfig cfg;
    cfg.k = 3;
    cfg.beta = 0.0;
    cfg.seed = 9;
    EXPECT_EQ(ec_clustering(a, cfg)[3], ec_clustering(b, cfg)[3]);
    cfg.k = 0;
    cfg.k_max = 4;
    EXPECT_EQ(ec_clustering(a, cfg)[3], ec_clustering(b, cfg)[3]);
}

TEST(EcClustering, EmptySnapshotFollowsPreviousStructure) {
    const auto x = two_cliques(5, {3});
    EcConfig cfg;
    cfg.k = 2;
    cfg.beta = 0.5;
    const auto labels = ec_clustering(x, cfg);
    EXPECT_TRUE(same_partition(labels[3], labels[2]));
}

TEST(EcClustering, RejectsBadConfig) {
    const auto x = two_cliques(2);
    EcConfig cfg;
    cfg.k = 13;
    EXPECT_THROW(ec_clustering(x, cfg), InvalidArgument);
    cfg.k = 2;
    cfg.beta = 1.5;
    EXPECT_THROW(ec_clustering(x, cfg), InvalidArgument);
}

TEST(EcToClusters, StablePartition) {
    const std::vector<std::vector<int>> a(4, std::vector<int>{0, 0, 1, 1, 1});
    const auto cs = ec_to_clusters(a);
    ASSERT_EQ(cs.size(), 2u);
    EXPECT_EQ(cs[0].members, (std::vector<int>{2, 3, 4}));
    EXPECT_EQ(cs[1].members, (std::vector<int>{0, 1}));
    for (const auto& c : cs) EXPECT_EQ(c.lifetime, (std::vector<int>{0, 1, 2, 3}));
}

TEST(EcToClusters, EvenStepsOnly) {
    std::vector<std::vector<int>> a;
    for (int t = 0; t < 6; ++t) a.push_back(t % 2 == 0 ? std::vector<int>{0, 0, 1, 1} : std::vector<int>{0, 1, 0, 1});
    const auto cs = ec_to_clusters(a);
    bool found = false;
    for (const auto& c : cs)
        if (c.members == std::vector<int>{0, 1}) {
            found = true;
            EXPECT_EQ(c.lifetime, (std::vector<int>{0, 2, 4}));
        }
    EXPECT_TRUE(found);
}

TEST(EcToClusters, NeverRepeatingRankedBySize) {
    const std::vector<std::vector<int>> a{{0, 0, 0, 1}, {0, 1, 1, 1}, {0, 0, 1, 1}};
    auto cs = ec_to_clusters(a);
    ASSERT_EQ(cs.size(), 6u);
    for (const auto& c : cs) EXPECT_EQ(c.lifetime.size(), 1u);
    for (std::size_t k = 1; k < cs.size(); ++k) EXPECT_GE(cs[k - 1].members.size(), cs[k].members.size());
    EcUnifyOptions o;
    o.max_retained = 2;
    EXPECT_EQ(ec_to_clusters(a, o).size(), 2u);
}

TEST(EcProfile, ObservedMeanInsideLifetime) {
    const auto x = two_cliques(3);
    const EcCluster c{fixtures::range(0, 6), {0, 2}};
    const auto p = ec_profile(c, x, 5);
    EXPECT_EQ(p.source, 5);
    EXPECT_DOUBLE_EQ(p.rate[0], 1.0);
    EXPECT_EQ(p.rate[1], 0.0);
    EXPECT_DOUBLE_EQ(p.rate[2], 1.0);
}

TEST(BaselineProperty, DisjointEcMissesOverlapTcRecovers) {
    // Two planted cliques sharing six nodes.
    std::vector<GroundTruthCluster> cs{fixtures::constant_cluster(fixtures::range(0, 12), 0, 119, 0.6),
                                       fixtures::constant_cluster(fixtures::range(6, 18), 0, 119, 0.6)};
    cs[1].pieces[0] = {0, 119, RatePiece::Kind::Linear, 0.2, 0.9};
    const auto net = plant(30, 120, cs, 0.002, 77);
    const auto truth = make_truth_set(net.truth, 1);

    TcOptions tc;
    tc.cp.mask_diagonal = true;
    const auto tcm = evaluate_tc(run_tc(net.tensor, 2, tc), truth);

    EcConfig ec;
    ec.k = 3;
    const auto ecm = evaluate_ec(ec_to_clusters(ec_clustering(net.tensor, ec)), net.tensor, truth);
    EXPECT_LT(ecm.member.recall, tcm.member.recall);
}
