#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace cflevels;
using namespace cflevels::testing;

TEST(Precompute, Worked)
{
    const auto m = worked();
    const similarity_method pcc_method(method_kind::pcc);
    const auto cache = precompute(m, pcc_method);
    // All six pairs share an item; the User1/User3 pair shares only one and is not stored.
    EXPECT_EQ(cache.candidate_pairs(), 6u);
    EXPECT_EQ(cache.size(), 5u);
    EXPECT_FALSE(cache.find(m.require_user("User1"), m.require_user("User3")).has_value());
    EXPECT_NEAR(*cache.find(m.require_user("User2"), m.require_user("User1")), -0.8660254037844386, 1e-12);
}

TEST(Precompute, EmptyMatrix)
{
    const ratings_matrix m(std::vector<rating_record>{}, {1.0, 5.0});
    const auto cache = precompute(m, similarity_method(method_kind::pcc));
    EXPECT_EQ(cache.size(), 0u);
    EXPECT_EQ(cache.candidate_pairs(), 0u);
}

TEST(Precompute, SelectorAndJobsAreDeterministic)
{
    std::mt19937_64 rng(31);
    const auto m = random_matrix(rng, 40, 30, 0.2);
    const auto method = similarity_method::for_matrix({method_kind::dynamic_proposed, {}}, m);
    const auto serial = precompute(m, method, {}, 1);
    const auto threaded = precompute(m, method, {}, 4);
    EXPECT_EQ(serial.entries(), threaded.entries());
    EXPECT_EQ(serial.candidate_pairs(), threaded.candidate_pairs());

    const auto strict = precompute(m, method, {.min_corated = 3});
    EXPECT_LE(strict.size(), serial.size());
    for (const auto& e : strict.entries()) {
        EXPECT_GE(co_rated_items(m, user_index{e.a}, user_index{e.b}).size(), 3u);
        EXPECT_EQ(*serial.find(user_index{e.a}, user_index{e.b}), e.score);
    }
}

TEST(GetOrCompute, TransparentAndSymmetric)
{
    std::mt19937_64 rng(37);
    const auto m = random_matrix(rng, 15, 12, 0.5);
    const similarity_method method(method_kind::spcc);
    auto cache = precompute(m, method);
    similarity_cache empty(method.fingerprint(m));
    for (std::size_t a = 0; a < m.user_count(); ++a) {
        for (std::size_t b = 0; b < m.user_count(); ++b) {
            if (a == b) continue;
            const double direct = method(m, uidx(a), uidx(b));
            ASSERT_EQ(get_or_compute(cache, uidx(a), uidx(b), method, m), direct);
            ASSERT_EQ(get_or_compute(empty, uidx(a), uidx(b), method, m), direct);
            ASSERT_EQ(get_or_compute(empty, uidx(b), uidx(a), method, m), direct);
        }
    }
    const cached_similarity sim(cache, method, m);
    EXPECT_EQ(sim(uidx(0), uidx(1)), method(m, uidx(0), uidx(1)));
}

TEST(GetOrCompute, FingerprintMismatch)
{
    const auto m = worked();
    auto cache = precompute(m, similarity_method(method_kind::pcc));
    const similarity_method other(method_kind::wpcc, {.wpcc_threshold = 5});
    EXPECT_THROW(get_or_compute(cache, uidx(0), uidx(1), other, m), fingerprint_mismatch);
    const similarity_method wide(method_kind::wpcc, {.wpcc_threshold = 6});
    EXPECT_NE(other.fingerprint(m), wide.fingerprint(m));

    auto recs = worked_records();
    recs[0].value = 2;
    const ratings_matrix changed(recs, {1.0, 5.0});
    EXPECT_THROW(cached_similarity(cache, similarity_method(method_kind::pcc), changed), fingerprint_mismatch);
}

TEST(CacheFile, RoundTrip)
{
    std::mt19937_64 rng(41);
    const auto m = random_matrix(rng, 20, 15, 0.4);
    const auto method = similarity_method::for_matrix({method_kind::dynamic_proposed, {}}, m);
    const auto cache = precompute(m, method);
    std::stringstream buf;
    cache.save(buf);
    const auto bytes = buf.str();
    EXPECT_EQ(bytes.substr(0, 5), "CFLV1");
    EXPECT_EQ(bytes.size(), 5 + 4 + cache.fingerprint().size() + 8 + cache.size() * 16);

    std::stringstream in(bytes);
    const auto loaded = similarity_cache::load(in, method.fingerprint(m));
    EXPECT_EQ(loaded.entries(), cache.entries());

    std::stringstream again(bytes);
    EXPECT_THROW(similarity_cache::load(again, "pcc|other"), fingerprint_mismatch);
    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    ASSERT_GT(cache.size(), 0u);
    EXPECT_THROW(similarity_cache::load(truncated, method.fingerprint(m)), data_error);
    std::stringstream junk("NOTACACHE");
    EXPECT_THROW(similarity_cache::load(junk, method.fingerprint(m)), data_error);
}
