#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tpe/error.hpp"
#include "tpe/search.hpp"

using namespace tpe;
using namespace tpe::search;

namespace {

KeywordUniverse make_universe(std::size_t n) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) {
        words.push_back("kw" + std::to_string(i));
    }
    return KeywordUniverse(words);
}

std::set<std::string> random_subset(const KeywordUniverse& u, RandomSource& rng) {
    std::set<std::string> out;
    for (const auto& w : u.keywords()) {
        if (rng.uniform_below(3) == 0) {
            out.insert(w);
        }
    }
    return out;
}

// Plain set intersection size, no vectors involved.
std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::vector<std::string> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return common.size();
}

SecretKey index_key(const KeywordUniverse& u, std::uint64_t seed) {
    auto rng = RandomSource::from_seed(seed);
    return keygen(index_params(u), rng);
}

} // namespace

TEST(Universe, RejectsDuplicatesAndEmpty) {
    EXPECT_THROW(KeywordUniverse({"a", "b", "a"}), InvalidParameter);
    EXPECT_THROW(KeywordUniverse({}), InvalidParameter);
    KeywordUniverse u({"x", "y"});
    EXPECT_EQ(u.index_of("y"), 1u);
    EXPECT_FALSE(u.index_of("z").has_value());
}

TEST(Universe, DigestDependsOnOrder) {
    EXPECT_NE(KeywordUniverse({"a", "b"}).digest(), KeywordUniverse({"b", "a"}).digest());
    EXPECT_EQ(KeywordUniverse({"a", "b"}).digest(), KeywordUniverse({"a", "b"}).digest());
}

TEST(Incidence, SpecExamples) {
    KeywordUniverse u({"a", "b", "c", "d"});
    EXPECT_EQ(build_incidence_vector(u, {}), (Template{0, 0, 0, 0}));
    EXPECT_EQ(build_incidence_vector(u, {"a", "b", "c", "d"}), (Template{1, 1, 1, 1}));
    EXPECT_EQ(build_incidence_vector(u, {"b", "d"}), (Template{0, 1, 0, 1}));
    EXPECT_THROW(build_incidence_vector(u, {"e"}), UnknownKeyword);
}

// Property: |S_i n S_j| = x_i . x_j on 500 random pairs.
TEST(IncidenceProperty, OverlapIsInnerProduct) {
    auto u = make_universe(30);
    auto rng = RandomSource::from_seed(1);
    for (int i = 0; i < 500; ++i) {
        auto a = random_subset(u, rng);
        auto b = random_subset(u, rng);
        ASSERT_EQ(oracle::dot(build_incidence_vector(u, a), build_incidence_vector(u, b)),
                  static_cast<long>(overlap(a, b)));
    }
}

TEST(Search, FullOverlapAndDisjoint) {
    auto u = make_universe(6);
    auto sk = index_key(u, 2);
    auto rng = RandomSource::from_seed(3);
    std::set<std::string> all(u.keywords().begin(), u.keywords().end());
    std::vector<EncryptedIndexEntry> entries = {
        index_encrypt(sk, u, "full", all, 5, rng),
        index_encrypt(sk, u, "left", {"kw0", "kw1"}, 0, rng),
    };
    auto r = search::search(entries, query_token(sk, u, all, rng));
    EXPECT_EQ(r.matches, (std::vector<std::string>{"full", "left"}));
    // Disjoint from "left" at theta 0; overlap 2 does not exceed 5 for "full".
    r = search::search(entries, query_token(sk, u, {"kw4", "kw5"}, rng));
    EXPECT_TRUE(r.matches.empty());
    r = search::search(entries, query_token(sk, u, {"kw0"}, rng));
    EXPECT_EQ(r.matches, (std::vector<std::string>{"left"}));
}

TEST(Search, EmptyQueryAndSingleFile) {
    auto u = make_universe(5);
    auto sk = index_key(u, 4);
    auto rng = RandomSource::from_seed(5);
    const std::set<std::string> kws = {"kw1", "kw2", "kw4"};
    std::vector<EncryptedIndexEntry> entries = {index_encrypt(sk, u, "only", kws, 2, rng)};
    EXPECT_TRUE(search::search(entries, query_token(sk, u, {}, rng)).matches.empty());
    EXPECT_EQ(search::search(entries, query_token(sk, u, kws, rng)).matches, (std::vector<std::string>{"only"}));
}

TEST(Search, ForeignEntriesSkipped) {
    auto u = make_universe(5);
    auto other = make_universe(7);
    auto sk = index_key(u, 6);
    auto sk_other = index_key(other, 7);
    auto rng = RandomSource::from_seed(8);
    std::vector<EncryptedIndexEntry> entries = {
        index_encrypt(sk, u, "mine", {"kw0"}, 0, rng),
        index_encrypt(sk_other, other, "theirs", {"kw0"}, 0, rng),
    };
    auto r = search::search(entries, query_token(sk, u, {"kw0"}, rng));
    EXPECT_EQ(r.matches, (std::vector<std::string>{"mine"}));
    EXPECT_EQ(r.skipped, (std::vector<std::string>{"theirs"}));
}

// Property: 100-file corpus with per-file thresholds; encrypted search equals
// the plaintext filter for several queries.
TEST(SearchProperty, CorpusMatchesOracle) {
    auto u = make_universe(16);
    auto sk = index_key(u, 9);
    auto rng = RandomSource::from_seed(10);
    std::vector<EncryptedIndexEntry> entries;
    std::vector<std::pair<std::set<std::string>, std::int64_t>> plain;
    for (int i = 0; i < 100; ++i) {
        auto kws = random_subset(u, rng);
        const auto theta = static_cast<std::int64_t>(rng.uniform_below(4));
        entries.push_back(index_encrypt(sk, u, "file" + std::to_string(i), kws, theta, rng));
        plain.emplace_back(kws, theta);
    }
    for (int q = 0; q < 5; ++q) {
        auto query = random_subset(u, rng);
        std::vector<std::string> expected;
        for (std::size_t i = 0; i < plain.size(); ++i) {
            if (static_cast<std::int64_t>(overlap(plain[i].first, query)) > plain[i].second) {
                expected.push_back("file" + std::to_string(i));
            }
        }
        auto r = search::search(entries, query_token(sk, u, query, rng));
        EXPECT_EQ(r.matches, expected) << "query " << q;
        EXPECT_TRUE(r.skipped.empty());
    }
}

TEST(QueryToken, TwoTokensAreByteDistinct) {
    auto u = make_universe(5);
    auto sk = index_key(u, 11);
    auto rng = RandomSource::from_seed(12);
    EXPECT_NE(serialize_token(query_token(sk, u, {"kw1"}, rng)), serialize_token(query_token(sk, u, {"kw1"}, rng)));
}

TEST(WeightedSum, SpecExamples) {
    auto rng = RandomSource::from_seed(13);
    auto sk = keygen(weighted_sum_params(2), rng);
    std::vector<EncryptedRecord> records = {record_encrypt(sk, "s1", Template{80, 90}, rng)};
    EXPECT_EQ(weighted_sum_filter(records, weighted_sum_token(sk, Template{1, 1}, 169, rng)).matches,
              (std::vector<std::string>{"s1"}));
    EXPECT_TRUE(weighted_sum_filter(records, weighted_sum_token(sk, Template{1, 1}, 170, rng)).matches.empty());
    EXPECT_TRUE(weighted_sum_filter(records, weighted_sum_token(sk, Template{0, 0}, 0, rng)).matches.empty());
    EXPECT_THROW(weighted_sum_token(sk, Template{1, 1, 1}, 0, rng), DimensionMismatch);
}

// Property: 50 random grade records; encrypted filter equals plaintext filter.
TEST(WeightedSumProperty, FilterMatchesOracle) {
    auto rng = RandomSource::from_seed(14);
    const std::size_t n = 6;
    auto sk = keygen(weighted_sum_params(n), rng);
    std::vector<EncryptedRecord> records;
    std::vector<Template> grades;
    for (int i = 0; i < 50; ++i) {
        Template g(n);
        for (auto& e : g) {
            e = static_cast<std::int64_t>(rng.uniform_below(101));
        }
        records.push_back(record_encrypt(sk, "r" + std::to_string(i), g, rng));
        grades.push_back(g);
    }
    for (int q = 0; q < 4; ++q) {
        Template w(n);
        for (auto& e : w) {
            e = static_cast<std::int64_t>(rng.uniform_below(5));
        }
        const auto theta = static_cast<std::int64_t>(rng.uniform_below(1200));
        std::vector<std::string> expected;
        for (std::size_t i = 0; i < grades.size(); ++i) {
            if (oracle::dot(grades[i], w) > theta) {
                expected.push_back("r" + std::to_string(i));
            }
        }
        EXPECT_EQ(weighted_sum_filter(records, weighted_sum_token(sk, w, theta, rng)).matches, expected);
    }
}

TEST(Formats, IndexRoundTrip) {
    auto u = make_universe(4);
    auto sk = index_key(u, 15);
    auto rng = RandomSource::from_seed(16);
    IndexFile index{u, {index_encrypt(sk, u, "f/a.txt", {"kw0", "kw3"}, 1, rng)}};
    auto bytes = serialize_index(index);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "TPEX");
    auto back = deserialize_index(bytes);
    EXPECT_EQ(back.universe, u);
    ASSERT_EQ(back.entries.size(), 1u);
    EXPECT_EQ(back.entries[0].file_id, "f/a.txt");
    EXPECT_EQ(back.entries[0].index_ct, index.entries[0].index_ct);
    bytes[14] ^= 0x01;
    EXPECT_THROW(deserialize_index(bytes), FormatError);
}

TEST(Formats, RecordsRoundTrip) {
    auto rng = RandomSource::from_seed(17);
    auto sk = keygen(weighted_sum_params(2), rng);
    std::vector<EncryptedRecord> records = {record_encrypt(sk, "a", Template{1, 2}, rng),
                                            record_encrypt(sk, "b", Template{3, 4}, rng)};
    auto back = deserialize_records(serialize_records(records));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].record_id, "b");
    EXPECT_EQ(back[1].ct, records[1].ct);
}
