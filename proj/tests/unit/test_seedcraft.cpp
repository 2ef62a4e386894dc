#include <doctest.h>

#include <algorithm>

#include "antroute/errors.hpp"
#include "antroute/rng.hpp"
#include "antroute/seedcraft.hpp"
#include "sha256_ref.hpp"

using namespace antroute;

namespace {

Nonce128 nonce_with_last(std::uint8_t v) {
    Nonce128 n{};
    n[15] = v;
    return n;
}

std::vector<std::uint8_t> concat(const Nonce128& a, const Nonce128& b) {
    std::vector<std::uint8_t> v(a.begin(), a.end());
    v.insert(v.end(), b.begin(), b.end());
    return v;
}

SeedMessage random_message(Rng& rng) {
    SeedMessage m;
    m.kind = static_cast<SeedKind>(rng.uniform(0, 2));
    m.direction = static_cast<Direction>(rng.uniform(0, 1));
    for (auto& b : m.r.bytes) b = static_cast<std::uint8_t>(rng.next());
    m.counter = static_cast<std::uint32_t>(rng.next());
    m.amount = rng.next();
    m.max_fee = rng.next();
    m.current_fee = rng.uniform(0, m.max_fee);
    if (m.kind != SeedKind::Pheromone) m.matching_id = MatchingId{rng.next()};
    return m;
}

}  // namespace

TEST_CASE("reference SHA-256 agrees with published vectors") {
    // Frozen from Python hashlib.
    const std::vector<std::uint8_t> abc{'a', 'b', 'c'};
    CHECK(to_hex(testing::sha256_reference(abc)) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(to_hex(testing::sha256_reference(std::vector<std::uint8_t>(1000, 'a'))) ==
          "41edece42d63e8d9bf515a9ba6932e1c20cbc9f5a5d134645adb5db1b9737ea3");
}

TEST_CASE("make_pheromone_pair on all-zero secrets") {
    const Nonce128 zero{};
    auto [a, b] = make_pheromone_pair(zero, zero, 1000, 50);
    const auto expected = "66687aadf862bd776c8fc18b8e9f8e20089714856ee233b3902a591d0d5f2925";
    CHECK(a.r.hex() == expected);
    CHECK(to_hex(testing::sha256_reference(std::vector<std::uint8_t>(32, 0))) == expected);
    CHECK(a.r == b.r);
    CHECK(a.direction == Direction::A);
    CHECK(b.direction == Direction::B);
    CHECK(a.kind == SeedKind::Pheromone);
    CHECK(b.kind == SeedKind::Pheromone);
    CHECK(a.current_fee == 0);
    CHECK(b.current_fee == 0);
    CHECK(a.amount == 1000);
    CHECK(a.max_fee == 50);
}

TEST_CASE("concatenation order matters") {
    const auto one = nonce_with_last(1);
    const auto two = nonce_with_last(2);
    const auto forward = derive_seed(one, two);
    const auto backward = derive_seed(two, one);
    CHECK(forward != backward);
    CHECK(forward.hex() == "78d68721debb423cf880232869a63e2522c3dd6187159cbeb15b3ee7e15925f8");
    CHECK(backward.hex() == "2cf6b74e206ddbbc767acae14ca12be843dc582c4f508414129b9a36cbf7d72d");
}

TEST_CASE("derive_seed matches the reference digest on random secrets") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        Nonce128 a{}, b{};
        for (auto& x : a) x = static_cast<std::uint8_t>(rng.next());
        for (auto& x : b) x = static_cast<std::uint8_t>(rng.next());
        CHECK(derive_seed(a, b).bytes == testing::sha256_reference(concat(a, b)));
        CHECK(derive_seed(a, b) == derive_seed(a, b));
    }
}

TEST_CASE("conjugate") {
    auto [a, b] = make_pheromone_pair(nonce_with_last(3), nonce_with_last(4), 10, 20);
    a.counter = 17;
    a.current_fee = 6;
    const auto c = conjugate(a);
    CHECK(c.direction == Direction::B);
    CHECK(c.r == a.r);
    CHECK(c.counter == 17);
    CHECK(c.current_fee == 6);
    CHECK(c.max_fee == 20);
    CHECK(c.amount == 10);
    CHECK(conjugate(c) == a);
    CHECK(conjugate(b).direction == Direction::A);

    const auto m = promote_to_matched(a, MatchingId{1}, 7);
    CHECK_THROWS_AS(conjugate(m), ProtocolError);
}

TEST_CASE("promote_to_matched") {
    auto [a, b] = make_pheromone_pair(nonce_with_last(1), nonce_with_last(2), 100, 20);
    a.current_fee = 5;
    const auto m = promote_to_matched(a, MatchingId{42}, 12);
    CHECK(m.kind == SeedKind::Matched);
    CHECK(m.current_fee == 12);
    CHECK(m.matching_id == MatchingId{42});
    CHECK(m.r == a.r);
    CHECK(m.direction == a.direction);
    CHECK(prefix_bits(m.kind) == prefix_bits(a.kind) + 1);

    CHECK_THROWS_AS(promote_to_matched(a, MatchingId{1}, 25), ProtocolError);
    CHECK_THROWS_AS(promote_to_matched(m, MatchingId{1}, 12), ProtocolError);
}

TEST_CASE("promote_to_confirmed") {
    auto [a, b] = make_pheromone_pair(nonce_with_last(9), nonce_with_last(8), 100, 20);
    const auto m = promote_to_matched(b, MatchingId{77}, 3);
    const auto c = promote_to_confirmed(m);
    CHECK(c.kind == SeedKind::Confirmed);
    CHECK(c.matching_id == MatchingId{77});
    CHECK(c.current_fee == 3);
    CHECK(c.r == b.r);
    CHECK(prefix_bits(c.kind) == prefix_bits(b.kind) + 2);
    CHECK_THROWS_AS(promote_to_confirmed(b), ProtocolError);
    CHECK_THROWS_AS(promote_to_confirmed(c), ProtocolError);
}

TEST_CASE("tag byte enumeration") {
    CHECK(tag_of(SeedKind::Pheromone, Direction::A) == 0x00);
    CHECK(tag_of(SeedKind::Pheromone, Direction::B) == 0x01);
    CHECK(tag_of(SeedKind::Matched, Direction::A) == 0x02);
    CHECK(tag_of(SeedKind::Matched, Direction::B) == 0x03);
    CHECK(tag_of(SeedKind::Confirmed, Direction::A) == 0x04);
    CHECK(tag_of(SeedKind::Confirmed, Direction::B) == 0x05);
}

TEST_CASE("frame layout is big-endian and fixed width") {
    SeedMessage m;
    m.kind = SeedKind::Matched;
    m.direction = Direction::B;
    m.r.bytes.fill(0xab);
    m.counter = 0x01020304;
    m.amount = 0x1112131415161718ULL;
    m.max_fee = 0x21;
    m.current_fee = 0x20;
    m.matching_id = MatchingId{0xdeadbeefcafef00dULL};
    const auto f = encode(m);
    REQUIRE(f.size() == kLinkedFrameSize);
    CHECK(f[0] == 0x03);
    CHECK(f[1] == 0xab);
    CHECK(f[32] == 0xab);
    CHECK(f[33] == 0x01);
    CHECK(f[36] == 0x04);
    CHECK(f[37] == 0x11);
    CHECK(f[44] == 0x18);
    CHECK(f[52] == 0x21);
    CHECK(f[60] == 0x20);
    CHECK(f[61] == 0xde);
    CHECK(f[68] == 0x0d);
}

TEST_CASE("codec round-trip over random messages") {
    Rng rng(2024);
    for (int i = 0; i < 2000; ++i) {
        const auto m = random_message(rng);
        const auto frame = encode(m);
        CHECK(frame.size() == (m.kind == SeedKind::Pheromone ? kPheromoneFrameSize : kLinkedFrameSize));
        CHECK(decode(frame) == m);
    }
}

TEST_CASE("decode rejects malformed frames") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto frame = encode(random_message(rng));
        CHECK_THROWS_AS(decode(std::span(frame).first(frame.size() - 1)), DecodeError);
    }
    std::vector<std::uint8_t> bad(kPheromoneFrameSize, 0);
    bad[0] = 0x06;
    CHECK_THROWS_AS(decode(bad), DecodeError);
    CHECK_THROWS_AS(decode(std::span<const std::uint8_t>{}), DecodeError);

    // A matched tag on a pheromone-sized frame is missing its matching id.
    bad[0] = 0x02;
    CHECK_THROWS_AS(decode(bad), DecodeError);
}

TEST_CASE("encode refuses inconsistent matching id") {
    SeedMessage m;
    m.kind = SeedKind::Matched;
    CHECK_THROWS_AS(encode(m), ProtocolError);
    m.kind = SeedKind::Pheromone;
    m.matching_id = MatchingId{1};
    CHECK_THROWS_AS(encode(m), ProtocolError);
}
