#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "barriernet/errors.hpp"

// Little-endian binary IO with a running FNV-1a 64 digest. Both dataset files
// and checkpoints end in the digest of everything before it.

namespace barriernet::binio {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a_str(const std::string& s, std::uint64_t h = kFnvOffset) {
    return fnv1a(s.data(), s.size(), h);
}

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void raw(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), std::streamsize(n));
        digest_ = fnv1a(data, n, digest_);
    }

    template <typename T>
    void value(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        raw(&v, sizeof v);
    }

    void string(const std::string& s) {
        value(std::uint32_t(s.size()));
        raw(s.data(), s.size());
    }

    template <typename T>
    void doubles(const std::vector<T>& v) {
        value(std::uint64_t(v.size()));
        for (T x : v) value(double(x));
    }

    // Appends the digest itself (not folded into the digest).
    void finish() {
        std::uint64_t d = digest_;
        out_.write(reinterpret_cast<const char*>(&d), sizeof d);
    }

    std::uint64_t digest() const { return digest_; }

private:
    std::ostream& out_;
    std::uint64_t digest_ = kFnvOffset;
};

class Reader {
public:
    explicit Reader(std::istream& in, std::string context) : in_(in), context_(std::move(context)) {}

    void raw(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), std::streamsize(n));
        if (std::size_t(in_.gcount()) != n) throw IoError(context_ + ": truncated file");
        digest_ = fnv1a(data, n, digest_);
    }

    template <typename T>
    T value() {
        static_assert(std::is_trivially_copyable_v<T>);
        T v;
        raw(&v, sizeof v);
        return v;
    }

    std::string string(std::size_t max = 1 << 20) {
        auto n = value<std::uint32_t>();
        if (n > max) throw IoError(context_ + ": string length " + std::to_string(n) + " out of bounds");
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }

    template <typename T>
    std::vector<T> doubles(std::size_t expected) {
        auto n = value<std::uint64_t>();
        if (n != expected)
            throw IoError(context_ + ": tensor size " + std::to_string(n) + ", expected " +
                          std::to_string(expected));
        std::vector<T> v(n);
        for (auto& x : v) x = T(value<double>());
        return v;
    }

    // Reads the trailing digest and compares with the running one.
    void verify() {
        std::uint64_t expect = digest_;
        std::uint64_t stored;
        in_.read(reinterpret_cast<char*>(&stored), sizeof stored);
        if (std::size_t(in_.gcount()) != sizeof stored) throw IoError(context_ + ": missing checksum");
        if (stored != expect) throw IoError(context_ + ": checksum mismatch, file is corrupt");
    }

private:
    std::istream& in_;
    std::string context_;
    std::uint64_t digest_ = kFnvOffset;
};

}  // namespace barriernet::binio
