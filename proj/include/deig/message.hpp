#pragma once

#include <deig/types.hpp>

#include <cstdint>
#include <vector>

namespace deig {

// Wire tags. On the wire a frame is: u32 length (bytes after the length
// field), u8 tag, u32 kind, u64 weight, f64 payload — little-endian
// throughout. Frame overhead is a fixed 17 bytes; payload accounts for
// 8 bytes per real and is ledgered separately.
enum class Tag : std::uint8_t {
    broadcast_vector = 1,
    broadcast_scalar = 2,
    vector_reply = 3,
    scalar_reply = 4,
    control = 5,
};

enum class Kind : std::uint32_t {
    // coordinator -> worker payloads
    iterate = 1,
    deflation_vector = 2,
    mean = 3,
    anchor = 4,
    rayleigh_query = 5,
    newton_rhs = 6,
    pcr_basis = 7,
    covariance_query = 8,
    // coordinator -> worker control
    shift = 20,
    begin_eigenvector = 21,
    end_session = 22,
    query_local_eigenpair = 23,
    query_local_top_eigenvalue = 24,
    query_mean_vector = 25,
    hello = 26,
    // worker -> coordinator replies
    gradient = 40,
    newton_solution = 41,
    mean_vector = 42,
    local_eigvec = 43,
    pcr_normal = 44,
    covariance_matrix = 45,
    rayleigh_value = 46,
    local_eigval = 47,
    // a remote worker hit an exception and is shutting down
    worker_error = 60,
};

struct Message {
    Tag tag;
    Kind kind;
    std::uint64_t weight = 0;  // replies: worker sample count; else unused
    Vector payload;            // scalars travel as a 1-entry payload

    double scalar() const { return payload(0); }

    static Message broadcast(Kind kind, Vector v) {
        return {Tag::broadcast_vector, kind, 0, std::move(v)};
    }
    static Message broadcast(Kind kind, double value) {
        return {Tag::broadcast_scalar, kind, 0, Vector::Constant(1, value)};
    }
    static Message reply(Kind kind, std::uint64_t weight, Vector v) {
        return {Tag::vector_reply, kind, weight, std::move(v)};
    }
    static Message reply(Kind kind, std::uint64_t weight, double value) {
        return {Tag::scalar_reply, kind, weight, Vector::Constant(1, value)};
    }
    static Message control(Kind kind, std::uint64_t weight = 0) {
        return {Tag::control, kind, weight, Vector()};
    }
};

inline constexpr std::uint64_t kFrameOverheadBytes = 17;

inline std::uint64_t payload_bytes(const Message& m) {
    return 8 * static_cast<std::uint64_t>(m.payload.size());
}

// How many reply messages one worker sends back for an incoming message.
// Shared by the coordinator's gather logic on every transport.
int expected_replies(const Message& m);

std::vector<std::uint8_t> serialize(const Message& m);
Message deserialize(const std::uint8_t* data, std::size_t size);

}  // namespace deig
