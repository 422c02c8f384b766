#ifndef TPE_SEARCH_HPP
#define TPE_SEARCH_HPP

// Threshold set-intersection search and weighted-sum filtering.
//
// Both applications use a strict "> theta" test, realised on integers as
// ">= theta + 1" with a nonnegative accept predicate:
//
//   index entry  x' = (b x, -b (t + 1), r_x, 0)   query  y' = (a y, a, 0, r_y)
//   grade record x' = (b g, b, r_x, 0)            query  y' = (a w, -a (t + 1), 0, r_y)
//
// An index entry carries its own threshold; a weighted-sum token carries the
// threshold of the query that issued it.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "tpe/error.hpp"
#include "tpe/scheme.hpp"

namespace tpe::search {

class UnknownKeyword : public Error {
public:
    using Error::Error;
};

class KeywordUniverse {
public:
    // Throws InvalidParameter on an empty list or a duplicate keyword.
    explicit KeywordUniverse(std::vector<std::string> keywords);

    std::size_t size() const { return keywords_.size(); }
    const std::vector<std::string>& keywords() const { return keywords_; }
    std::optional<std::size_t> index_of(const std::string& keyword) const;
    // SHA-256 over the ordered keyword list.
    Digest digest() const;

    friend bool operator==(const KeywordUniverse& a, const KeywordUniverse& b) {
        return a.keywords_ == b.keywords_;
    }

private:
    std::vector<std::string> keywords_;
    std::unordered_map<std::string, std::size_t> position_;
};

// Characteristic vector of `keywords` over the universe order.
Template build_incidence_vector(const KeywordUniverse& universe, const std::set<std::string>& keywords);

// Key parameters for an index over this universe.
Params index_params(const KeywordUniverse& universe, unsigned key_bitwidth = kDefaultKeyBitwidth,
                    unsigned rand_bitwidth = kDefaultRandBitwidth);

ExtensionPlan plan_set_intersection(std::int64_t theta);
ExtensionPlan plan_weighted_sum(std::int64_t theta);

struct EncryptedIndexEntry {
    std::string file_id;
    Ciphertext index_ct;
};

EncryptedIndexEntry index_encrypt(const SecretKey& sk, const KeywordUniverse& universe, const std::string& file_id,
                                  const std::set<std::string>& keywords, std::int64_t theta, RandomSource& rng);
Token query_token(const SecretKey& sk, const KeywordUniverse& universe, const std::set<std::string>& keywords,
                  RandomSource& rng);

struct SearchResult {
    std::vector<std::string> matches;
    // Entries whose setup differs from the token's; left out of `matches`.
    std::vector<std::string> skipped;
};

// Ids of entries with |S_i & S_q| > theta_i, in index order.
SearchResult search(const std::vector<EncryptedIndexEntry>& entries, const Token& query);

// Grade records and weight tokens share one key of dimension n (the number
// of graded components).
Params weighted_sum_params(std::size_t n, unsigned key_bitwidth = kDefaultKeyBitwidth,
                           unsigned rand_bitwidth = kDefaultRandBitwidth);

struct EncryptedRecord {
    std::string record_id;
    Ciphertext ct;
};

EncryptedRecord record_encrypt(const SecretKey& sk, const std::string& record_id,
                               std::span<const std::int64_t> grades, RandomSource& rng);
// Accepts a record iff grades . weights > theta.
Token weighted_sum_token(const SecretKey& sk, std::span<const std::int64_t> weights, std::int64_t theta,
                         RandomSource& rng);
SearchResult weighted_sum_filter(const std::vector<EncryptedRecord>& records, const Token& token);

// Index file "TPEX": version, universe (u32 count, keywords), u32 entry
// count, then (file_id, ciphertext blob) pairs.
struct IndexFile {
    KeywordUniverse universe;
    std::vector<EncryptedIndexEntry> entries;
};

Bytes serialize_index(const IndexFile& index);
IndexFile deserialize_index(std::span<const std::uint8_t> bytes);

// Record file "TPEW": version, u32 count, then (record_id, ciphertext blob).
Bytes serialize_records(const std::vector<EncryptedRecord>& records);
std::vector<EncryptedRecord> deserialize_records(std::span<const std::uint8_t> bytes);

} // namespace tpe::search

#endif // TPE_SEARCH_HPP
