#include "antroute/seedcraft.hpp"

#include <openssl/evp.h>

#include <memory>

#include "antroute/errors.hpp"

namespace antroute {

namespace {

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t offset, int width) {
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 8) | in[offset + i];
    return v;
}

void require_pheromone(const SeedMessage& m, const char* op) {
    if (m.kind != SeedKind::Pheromone) throw ProtocolError(std::string(op) + ": expected a pheromone seed");
}

}  // namespace

std::string DerivedSeed::hex() const { return to_hex(bytes); }

const char* to_string(SeedKind kind) {
    switch (kind) {
    case SeedKind::Pheromone: return "pheromone";
    case SeedKind::Matched: return "matched";
    case SeedKind::Confirmed: return "confirmed";
    }
    return "?";
}

const char* to_string(Direction d) { return d == Direction::A ? "A" : "B"; }

DerivedSeed derive_seed(const Nonce128& r_a, const Nonce128& r_b) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    DerivedSeed out;
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), r_a.data(), r_a.size()) != 1 ||
        EVP_DigestUpdate(ctx.get(), r_b.data(), r_b.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), out.bytes.data(), &len) != 1 || len != out.bytes.size()) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    return out;
}

std::pair<SeedMessage, SeedMessage> make_pheromone_pair(const Nonce128& r_a, const Nonce128& r_b, Msat amount,
                                                        Msat max_fee) {
    SeedMessage a;
    a.kind = SeedKind::Pheromone;
    a.direction = Direction::A;
    a.r = derive_seed(r_a, r_b);
    a.amount = amount;
    a.max_fee = max_fee;
    a.current_fee = 0;
    SeedMessage b = a;
    b.direction = Direction::B;
    return {a, b};
}

SeedMessage conjugate(const SeedMessage& m) {
    require_pheromone(m, "conjugate");
    SeedMessage out = m;
    out.direction = opposite(m.direction);
    return out;
}

SeedMessage promote_to_matched(const SeedMessage& m, MatchingId id, Msat total_fee) {
    require_pheromone(m, "promote_to_matched");
    if (total_fee > m.max_fee) throw ProtocolError("promote_to_matched: total fee exceeds max fee");
    SeedMessage out = m;
    out.kind = SeedKind::Matched;
    out.matching_id = id;
    out.current_fee = total_fee;
    return out;
}

SeedMessage promote_to_confirmed(const SeedMessage& m) {
    if (m.kind != SeedKind::Matched || !m.matching_id)
        throw ProtocolError("promote_to_confirmed: expected a matched seed");
    SeedMessage out = m;
    out.kind = SeedKind::Confirmed;
    return out;
}

std::uint8_t tag_of(SeedKind kind, Direction direction) {
    return static_cast<std::uint8_t>(2 * static_cast<int>(kind) + static_cast<int>(direction));
}

std::vector<std::uint8_t> encode(const SeedMessage& m) {
    const bool linked = m.kind != SeedKind::Pheromone;
    if (linked != m.matching_id.has_value())
        throw ProtocolError("encode: matching id must be present exactly on matched/confirmed seeds");
    std::vector<std::uint8_t> out;
    out.reserve(linked ? kLinkedFrameSize : kPheromoneFrameSize);
    out.push_back(tag_of(m.kind, m.direction));
    out.insert(out.end(), m.r.bytes.begin(), m.r.bytes.end());
    put_be(out, m.counter, 4);
    put_be(out, m.amount, 8);
    put_be(out, m.max_fee, 8);
    put_be(out, m.current_fee, 8);
    if (linked) put_be(out, m.matching_id->value, 8);
    return out;
}

SeedMessage decode(std::span<const std::uint8_t> frame) {
    if (frame.empty()) throw DecodeError("decode: empty frame");
    const std::uint8_t tag = frame[0];
    if (tag > 5) throw DecodeError("decode: unknown tag " + std::to_string(tag));
    SeedMessage m;
    m.kind = static_cast<SeedKind>(tag / 2);
    m.direction = static_cast<Direction>(tag % 2);
    const bool linked = m.kind != SeedKind::Pheromone;
    const std::size_t expected = linked ? kLinkedFrameSize : kPheromoneFrameSize;
    if (frame.size() < expected) throw DecodeError("decode: truncated frame");
    if (frame.size() > expected) throw DecodeError("decode: trailing bytes after frame");
    std::copy(frame.begin() + 1, frame.begin() + 33, m.r.bytes.begin());
    m.counter = static_cast<std::uint32_t>(get_be(frame, 33, 4));
    m.amount = get_be(frame, 37, 8);
    m.max_fee = get_be(frame, 45, 8);
    m.current_fee = get_be(frame, 53, 8);
    if (linked) m.matching_id = MatchingId{get_be(frame, 61, 8)};
    return m;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

}  // namespace antroute
