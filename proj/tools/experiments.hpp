#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace anisonorm::experiments {

/// Fixture placement for a bracket measurement.
enum class Variant { Base, Refined, Translated };

std::string to_string(Variant v);

/// One empirical constant. L_max is -1 when no kernel family is involved.
struct Measurement {
    std::string key;
    double value = 0.0;
    int J = 0;
    int L_max = -1;
};

/// Keys of every frozen constant, in store order.
const std::vector<std::string>& bracket_keys();

/// Variants a key is expected to be stable under.
std::vector<Variant> bracket_variants(const std::string& key);

Measurement measure(const std::string& key, Variant variant);

struct Bracket {
    double value = 0.0;
    int J = 0;
    int L_max = -1;
};

inline constexpr double kBracketTolerance = 0.2;
inline constexpr int kStoreVersion = 1;

bool within_bracket(double measured, double frozen, double tolerance = kBracketTolerance);

/// Versioned JSON file of frozen constants.
class BracketStore {
public:
    /// A missing file gives an empty store; a malformed one throws ValidationError.
    static BracketStore load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::optional<Bracket> find(const std::string& key) const;
    void set(const std::string& key, const Bracket& b) { entries_[key] = b; }
    const std::map<std::string, Bracket>& entries() const { return entries_; }

private:
    std::map<std::string, Bracket> entries_;
};

/// ANISONORM_BRACKETS when set, else the store shipped in the source tree.
std::filesystem::path default_bracket_path();

struct CheckResult {
    std::string module;
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Closed-form examples of every module, each cheap enough for a smoke run.
std::vector<CheckResult> trivial_suite();

}  // namespace anisonorm::experiments
