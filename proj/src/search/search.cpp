#include "tpe/search.hpp"

#include <algorithm>

#include <sodium.h>

namespace tpe::search {

namespace {

Integer big(std::int64_t v) { return Integer(static_cast<long>(v)); }

std::vector<Integer> scaled(std::span<const std::int64_t> v, const Integer& s) {
    std::vector<Integer> out;
    out.reserve(v.size() + 3);
    for (auto e : v) {
        out.push_back(s * big(e));
    }
    return out;
}

bool accepts(const Ciphertext& c, const Token& t) {
    return decrypt(c, t, AcceptWhen::NonNegative).accept;
}

} // namespace

// --- Universe -------------------------------------------------------------

KeywordUniverse::KeywordUniverse(std::vector<std::string> keywords) : keywords_(std::move(keywords)) {
    if (keywords_.empty()) {
        throw InvalidParameter("keyword universe is empty");
    }
    for (std::size_t i = 0; i < keywords_.size(); ++i) {
        if (!position_.emplace(keywords_[i], i).second) {
            throw InvalidParameter("duplicate keyword '" + keywords_[i] + "'");
        }
    }
}

std::optional<std::size_t> KeywordUniverse::index_of(const std::string& keyword) const {
    auto it = position_.find(keyword);
    if (it == position_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Digest KeywordUniverse::digest() const {
    ByteWriter w;
    w.magic("TPE universe v1");
    w.u32(static_cast<std::uint32_t>(keywords_.size()));
    for (const auto& k : keywords_) {
        w.str(k);
    }
    Digest d{};
    crypto_hash_sha256(d.data(), w.bytes().data(), w.bytes().size());
    return d;
}

Template build_incidence_vector(const KeywordUniverse& universe, const std::set<std::string>& keywords) {
    Template x(universe.size(), 0);
    for (const auto& k : keywords) {
        auto pos = universe.index_of(k);
        if (!pos) {
            throw UnknownKeyword("keyword '" + k + "' is not in the universe");
        }
        x[*pos] = 1;
    }
    return x;
}

// --- Plans ----------------------------------------------------------------

Params index_params(const KeywordUniverse& universe, unsigned key_bitwidth, unsigned rand_bitwidth) {
    return setup(universe.size(), 0, MetricKind::InnerProduct, key_bitwidth, rand_bitwidth);
}

ExtensionPlan plan_set_intersection(std::int64_t theta) {
    const Integer bound = big(theta) + 1;
    auto registered = [bound](std::span<const std::int64_t> x, const Integer& beta, const Integer& r_x) {
        auto out = scaled(x, beta);
        out.push_back(-beta * bound);
        out.push_back(r_x);
        out.push_back(0);
        return out;
    };
    auto query = [](std::span<const std::int64_t> y, const Integer& alpha, const Integer& r_y) {
        auto out = scaled(y, alpha);
        out.push_back(alpha);
        out.push_back(0);
        out.push_back(r_y);
        return out;
    };
    return ExtensionPlan("set-intersection", 3, AcceptWhen::NonNegative, registered, query);
}

ExtensionPlan plan_weighted_sum(std::int64_t theta) {
    const Integer bound = big(theta) + 1;
    auto registered = [](std::span<const std::int64_t> g, const Integer& beta, const Integer& r_x) {
        auto out = scaled(g, beta);
        out.push_back(beta);
        out.push_back(r_x);
        out.push_back(0);
        return out;
    };
    auto query = [bound](std::span<const std::int64_t> w, const Integer& alpha, const Integer& r_y) {
        auto out = scaled(w, alpha);
        out.push_back(-alpha * bound);
        out.push_back(0);
        out.push_back(r_y);
        return out;
    };
    return ExtensionPlan("weighted-sum", 3, AcceptWhen::NonNegative, registered, query);
}

// --- Set intersection -----------------------------------------------------

EncryptedIndexEntry index_encrypt(const SecretKey& sk, const KeywordUniverse& universe, const std::string& file_id,
                                  const std::set<std::string>& keywords, std::int64_t theta, RandomSource& rng) {
    const auto x = build_incidence_vector(universe, keywords);
    return EncryptedIndexEntry{file_id, encrypt(sk, x, plan_set_intersection(theta), rng)};
}

Token query_token(const SecretKey& sk, const KeywordUniverse& universe, const std::set<std::string>& keywords,
                  RandomSource& rng) {
    const auto y = build_incidence_vector(universe, keywords);
    // The query rule does not depend on theta.
    return token_gen(sk, y, plan_set_intersection(0), rng);
}

SearchResult search(const std::vector<EncryptedIndexEntry>& entries, const Token& query) {
    SearchResult result;
    for (const auto& e : entries) {
        try {
            if (accepts(e.index_ct, query)) {
                result.matches.push_back(e.file_id);
            }
        } catch (const ParamsMismatch&) {
            result.skipped.push_back(e.file_id);
        } catch (const DimensionMismatch&) {
            result.skipped.push_back(e.file_id);
        }
    }
    return result;
}

// --- Weighted sum ---------------------------------------------------------

Params weighted_sum_params(std::size_t n, unsigned key_bitwidth, unsigned rand_bitwidth) {
    return setup(n, 0, MetricKind::InnerProduct, key_bitwidth, rand_bitwidth);
}

EncryptedRecord record_encrypt(const SecretKey& sk, const std::string& record_id,
                               std::span<const std::int64_t> grades, RandomSource& rng) {
    // The record rule does not depend on theta.
    return EncryptedRecord{record_id, encrypt(sk, grades, plan_weighted_sum(0), rng)};
}

Token weighted_sum_token(const SecretKey& sk, std::span<const std::int64_t> weights, std::int64_t theta,
                         RandomSource& rng) {
    return token_gen(sk, weights, plan_weighted_sum(theta), rng);
}

SearchResult weighted_sum_filter(const std::vector<EncryptedRecord>& records, const Token& token) {
    SearchResult result;
    for (const auto& r : records) {
        try {
            if (accepts(r.ct, token)) {
                result.matches.push_back(r.record_id);
            }
        } catch (const ParamsMismatch&) {
            result.skipped.push_back(r.record_id);
        } catch (const DimensionMismatch&) {
            result.skipped.push_back(r.record_id);
        }
    }
    return result;
}

// --- Files ----------------------------------------------------------------

Bytes serialize_index(const IndexFile& index) {
    ByteWriter w;
    w.magic("TPEX");
    w.u8(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(index.universe.size()));
    for (const auto& k : index.universe.keywords()) {
        w.str(k);
    }
    w.raw(index.universe.digest());
    w.u32(static_cast<std::uint32_t>(index.entries.size()));
    for (const auto& e : index.entries) {
        w.str(e.file_id);
        w.blob(serialize_ciphertext(e.index_ct));
    }
    return w.take();
}

IndexFile deserialize_index(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("TPEX");
    if (r.u8() != kFormatVersion) {
        throw FormatError("unsupported index format version");
    }
    const std::uint32_t count = r.u32();
    if (count > r.remaining() / 4) {
        throw FormatError("universe header larger than payload");
    }
    std::vector<std::string> keywords;
    keywords.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        keywords.push_back(r.str());
    }
    std::optional<KeywordUniverse> universe;
    try {
        universe.emplace(std::move(keywords));
    } catch (const InvalidParameter& e) {
        throw FormatError(e.what());
    }
    auto stored = r.raw(32);
    const Digest expected = universe->digest();
    if (!std::equal(stored.begin(), stored.end(), expected.begin())) {
        throw FormatError("universe digest does not match keyword list");
    }
    const std::uint32_t entries = r.u32();
    if (entries > r.remaining() / 8) {
        throw FormatError("entry count larger than payload");
    }
    IndexFile out{std::move(*universe), {}};
    out.entries.reserve(entries);
    for (std::uint32_t i = 0; i < entries; ++i) {
        std::string id = r.str();
        out.entries.push_back({std::move(id), deserialize_ciphertext(r.blob())});
    }
    r.expect_end();
    return out;
}

Bytes serialize_records(const std::vector<EncryptedRecord>& records) {
    ByteWriter w;
    w.magic("TPEW");
    w.u8(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(records.size()));
    for (const auto& rec : records) {
        w.str(rec.record_id);
        w.blob(serialize_ciphertext(rec.ct));
    }
    return w.take();
}

std::vector<EncryptedRecord> deserialize_records(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("TPEW");
    if (r.u8() != kFormatVersion) {
        throw FormatError("unsupported record file version");
    }
    const std::uint32_t count = r.u32();
    if (count > r.remaining() / 8) {
        throw FormatError("record count larger than payload");
    }
    std::vector<EncryptedRecord> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string id = r.str();
        out.push_back({std::move(id), deserialize_ciphertext(r.blob())});
    }
    r.expect_end();
    return out;
}

} // namespace tpe::search
