#include <deig/message.hpp>

#include <deig/errors.hpp>

#include <cstring>

namespace deig {

int expected_replies(const Message& m) {
    switch (m.kind) {
        case Kind::iterate:
        case Kind::newton_rhs:
        case Kind::rayleigh_query:
        case Kind::pcr_basis:
        case Kind::covariance_query:
        case Kind::query_local_top_eigenvalue:
        case Kind::query_mean_vector:
            return 1;
        case Kind::query_local_eigenpair:
            return 2;
        default:
            return 0;
    }
}

std::vector<std::uint8_t> serialize(const Message& m) {
    const std::uint32_t body = 13 + static_cast<std::uint32_t>(payload_bytes(m));
    std::vector<std::uint8_t> out(4 + body);
    std::uint8_t* p = out.data();
    std::memcpy(p, &body, 4);
    p += 4;
    *p++ = static_cast<std::uint8_t>(m.tag);
    auto kind = static_cast<std::uint32_t>(m.kind);
    std::memcpy(p, &kind, 4);
    p += 4;
    std::memcpy(p, &m.weight, 8);
    p += 8;
    if (m.payload.size() > 0) {
        std::memcpy(p, m.payload.data(), payload_bytes(m));
    }
    return out;
}

Message deserialize(const std::uint8_t* data, std::size_t size) {
    if (size < 13 || (size - 13) % 8 != 0) {
        throw Error("deserialize: malformed frame body of " +
                    std::to_string(size) + " bytes");
    }
    Message m;
    m.tag = static_cast<Tag>(data[0]);
    std::uint32_t kind;
    std::memcpy(&kind, data + 1, 4);
    m.kind = static_cast<Kind>(kind);
    std::memcpy(&m.weight, data + 5, 8);
    const auto entries = static_cast<Index>((size - 13) / 8);
    m.payload.resize(entries);
    if (entries > 0) {
        std::memcpy(m.payload.data(), data + 13, size - 13);
    }
    return m;
}

}  // namespace deig
