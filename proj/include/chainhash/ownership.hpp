#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chainhash/verifier.hpp"

namespace chainhash {

struct OwnershipClaim {
    std::string party_id;
    ChainArtifact chain;
    SecretKey key;
};

struct PublishedModel {
    std::string model_id;
    std::optional<std::string> publisher;  // party id, if known
    std::shared_ptr<ModelClient> client;
    VerifyOptions options;
};

// parent model id -> child model id edges (child was derived from parent).
using LineageHint = std::vector<std::pair<std::string, std::string>>;

enum class OwnershipStatus { owned, undecided, unclaimed };
std::string_view to_string(OwnershipStatus status);

struct ModelResolution {
    std::string model_id;
    std::vector<std::string> verified_parties;
    OwnershipStatus status = OwnershipStatus::unclaimed;
    std::optional<std::string> owner;
};

struct PartyVerdict {
    std::string party_id;
    std::vector<std::string> owns;      // models resolved in this party's favour
    std::vector<std::string> verified;  // models where the fingerprint fired
};

struct OwnershipResult {
    std::vector<ModelResolution> models;
    std::vector<PartyVerdict> parties;
    // party -> model -> verdict of that party's chain on that model
    std::map<std::string, std::map<std::string, Verdict>> evidence;
};

/// Verifies every claim against every model, then settles each model:
/// a single verifying party owns it; among several, party P beats A when P's
/// chain verifies on a model A published (or on an ancestor of one, not
/// published by P) and A's chain verifies on none of P's models. The owner
/// must beat every other verifying party; otherwise the model is undecided.
OwnershipResult resolve_ownership(const std::vector<OwnershipClaim>& claims,
                                  const std::vector<PublishedModel>& models,
                                  const LineageHint& lineage = {});

// Same, with the evidence matrix already computed.
OwnershipResult resolve_from_evidence(
    const std::vector<std::string>& parties,
    const std::vector<std::pair<std::string, std::optional<std::string>>>& models,
    const std::map<std::string, std::map<std::string, Verdict>>& evidence,
    const LineageHint& lineage = {});

}  // namespace chainhash
