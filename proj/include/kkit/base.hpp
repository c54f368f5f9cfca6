#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kkit {

// Error with a stable machine-readable code ("DomainMismatch", "GridTooCoarse", ...).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool ok, const std::string& code, const std::string& what) {
    if (!ok) fail(code, what);
}

// Subset of {1..N} as a bitmask. Bit i-1 encodes membership of i.
struct IndexSet {
    std::uint32_t bits = 0;

    IndexSet() = default;
    explicit IndexSet(std::uint32_t b) : bits(b) {}
    static IndexSet single(int i) { return IndexSet(1u << (i - 1)); }
    static IndexSet of(std::initializer_list<int> xs) {
        IndexSet s;
        for (int i : xs) s.bits |= 1u << (i - 1);
        return s;
    }

    bool empty() const { return bits == 0; }
    int size() const { return __builtin_popcount(bits); }
    bool contains(int i) const { return (bits >> (i - 1)) & 1u; }
    bool subset_of(IndexSet o) const { return (bits & ~o.bits) == 0; }
    bool proper_subset_of(IndexSet o) const { return subset_of(o) && bits != o.bits; }
    IndexSet unite(IndexSet o) const { return IndexSet(bits | o.bits); }
    IndexSet intersect(IndexSet o) const { return IndexSet(bits & o.bits); }
    IndexSet minus(IndexSet o) const { return IndexSet(bits & ~o.bits); }

    std::vector<int> members() const {
        std::vector<int> out;
        for (int i = 1; i <= 32; ++i)
            if (contains(i)) out.push_back(i);
        return out;
    }

    bool operator==(const IndexSet& o) const { return bits == o.bits; }
    bool operator!=(const IndexSet& o) const { return bits != o.bits; }
    bool operator<(const IndexSet& o) const { return bits < o.bits; }

    std::string str() const {
        if (empty()) return "{}";
        std::string s = "{";
        bool first = true;
        for (int i : members()) {
            if (!first) s += ",";
            s += std::to_string(i);
            first = false;
        }
        return s + "}";
    }
};

// Enumerate all subsets of mask (including empty and full).
inline std::vector<IndexSet> subsets_of(IndexSet s) {
    std::vector<IndexSet> out;
    std::uint32_t m = s.bits;
    std::uint32_t sub = 0;
    while (true) {
        out.push_back(IndexSet(sub));
        if (sub == m) break;
        sub = (sub - m) & m;
    }
    return out;
}

inline std::uint64_t pair_key(IndexSet a, IndexSet b) {
    return (std::uint64_t(a.bits) << 32) | b.bits;
}

// One axiom clause of a validator report.
struct Clause {
    std::string name;
    bool pass = true;
    std::vector<std::string> witnesses;
};

struct Report {
    std::vector<Clause> clauses;

    bool ok() const {
        for (const auto& c : clauses)
            if (!c.pass) return false;
        return true;
    }
    Clause& add(const std::string& name) {
        clauses.push_back(Clause{name, true, {}});
        return clauses.back();
    }
    void merge(const Report& o) {
        clauses.insert(clauses.end(), o.clauses.begin(), o.clauses.end());
    }
    std::vector<std::string> failures() const {
        std::vector<std::string> out;
        for (const auto& c : clauses)
            if (!c.pass) out.push_back(c.name);
        return out;
    }
};

// splitmix64: deterministic RNG for the property suites (seeded via KKIT_SEED).
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0, n)
    std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }
    int range(int lo, int hi) { return lo + int(below(std::uint64_t(hi - lo + 1))); }
    bool chance(int num, int den) { return below(std::uint64_t(den)) < std::uint64_t(num); }
};

inline std::uint64_t env_seed(std::uint64_t fallback = 20240817ull) {
    if (const char* s = std::getenv("KKIT_SEED")) {
        try {
            return std::stoull(s);
        } catch (...) {
        }
    }
    return fallback;
}

} // namespace kkit
