#pragma once

#include <filesystem>
#include <string>

#include "chainhash/chain.hpp"

namespace chainhash {

inline constexpr std::string_view kProtocolVersion = "chainhash/1";
inline constexpr std::string_view kHashAlgorithm = "sha256";

/// The disclosed unit exchanged with a verifier:
///
///   {
///     "protocol_version": "chainhash/1",
///     "hash_alg": "sha256",
///     "questions": [...],
///     "table": [... 256 entries ...],
///     "key_present": false,
///     "assignments": [{"question", "target_index", "target_response"}, ...]
///   }
///
/// The key itself is never written; when key_present is true the verifier
/// must be handed the key out of band.
struct ChainArtifact {
    QuestionSet questions;
    ResponseTable table;
    bool key_present = false;
    TargetAssignment assignments;
};

ChainArtifact make_artifact(const QuestionSet& questions,
                            const ResponseTable& table,
                            const SecretKey& key = {});

// Deterministic serialization (fixed key order, two-space indent, trailing newline).
std::string serialize_artifact(const ChainArtifact& artifact);

// Structural parse only. Throws ValidationError on schema problems.
ChainArtifact parse_artifact(std::string_view text);

ChainArtifact load_artifact(const std::filesystem::path& path);

/// Recomputes every assignment and throws IntegrityError on any mismatch.
/// Throws ValidationError if the artifact declares a key and none is given.
void check_artifact(const ChainArtifact& artifact, const SecretKey& key = {});

}  // namespace chainhash
