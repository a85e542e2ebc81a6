#include "chainhash/ownership.hpp"

#include <algorithm>
#include <set>

#include "chainhash/errors.hpp"

namespace chainhash {
namespace {

std::set<std::string> ancestors_of(const std::string& model, const LineageHint& lineage) {
    std::set<std::string> seen;
    std::vector<std::string> frontier{model};
    while (!frontier.empty()) {
        const auto child = frontier.back();
        frontier.pop_back();
        for (const auto& [parent, c] : lineage) {
            if (c == child && seen.insert(parent).second) frontier.push_back(parent);
        }
    }
    seen.erase(model);
    return seen;
}

bool verified_on(const std::map<std::string, std::map<std::string, Verdict>>& evidence,
                 const std::string& party,
                 const std::string& model) {
    const auto p = evidence.find(party);
    if (p == evidence.end()) return false;
    const auto m = p->second.find(model);
    return m != p->second.end() && m->second == Verdict::owned;
}

}  // namespace

std::string_view to_string(OwnershipStatus status) {
    switch (status) {
        case OwnershipStatus::owned: return "owned";
        case OwnershipStatus::undecided: return "undecided";
        case OwnershipStatus::unclaimed: return "unclaimed";
    }
    return "unknown";
}

OwnershipResult resolve_from_evidence(
    const std::vector<std::string>& parties,
    const std::vector<std::pair<std::string, std::optional<std::string>>>& models,
    const std::map<std::string, std::map<std::string, Verdict>>& evidence,
    const LineageHint& lineage) {
    std::map<std::string, std::vector<std::string>> published_by;
    for (const auto& [id, publisher] : models) {
        if (publisher) published_by[*publisher].push_back(id);
    }
    auto published = [&](const std::string& party) -> const std::vector<std::string>& {
        static const std::vector<std::string> kNone;
        const auto it = published_by.find(party);
        return it == published_by.end() ? kNone : it->second;
    };

    // P's chain fires on something A published (or that A's model was derived
    // from, unless P published it), while A's chain fires on nothing of P's.
    auto beats = [&](const std::string& p, const std::string& a) {
        std::set<std::string> a_side;
        for (const auto& m : published(a)) {
            a_side.insert(m);
            for (const auto& anc : ancestors_of(m, lineage)) a_side.insert(anc);
        }
        for (const auto& m : published(p)) a_side.erase(m);
        const bool p_on_a = std::any_of(a_side.begin(), a_side.end(),
                                        [&](const std::string& m) { return verified_on(evidence, p, m); });
        const bool a_on_p = std::any_of(published(p).begin(), published(p).end(),
                                        [&](const std::string& m) { return verified_on(evidence, a, m); });
        return p_on_a && !a_on_p;
    };

    OwnershipResult result;
    result.evidence = evidence;
    std::map<std::string, PartyVerdict> by_party;
    for (const auto& p : parties) by_party[p].party_id = p;

    for (const auto& [model_id, publisher] : models) {
        ModelResolution res;
        res.model_id = model_id;
        for (const auto& p : parties) {
            if (verified_on(evidence, p, model_id)) {
                res.verified_parties.push_back(p);
                by_party[p].verified.push_back(model_id);
            }
        }
        if (res.verified_parties.empty()) {
            res.status = OwnershipStatus::unclaimed;
        } else if (res.verified_parties.size() == 1) {
            res.status = OwnershipStatus::owned;
            res.owner = res.verified_parties.front();
        } else {
            std::vector<std::string> winners;
            for (const auto& p : res.verified_parties) {
                const bool beats_all = std::all_of(res.verified_parties.begin(), res.verified_parties.end(),
                                                   [&](const std::string& a) { return a == p || beats(p, a); });
                if (beats_all) winners.push_back(p);
            }
            if (winners.size() == 1) {
                res.status = OwnershipStatus::owned;
                res.owner = winners.front();
            } else {
                res.status = OwnershipStatus::undecided;
            }
        }
        if (res.owner) by_party[*res.owner].owns.push_back(model_id);
        result.models.push_back(std::move(res));
    }
    for (const auto& p : parties) result.parties.push_back(by_party[p]);
    return result;
}

OwnershipResult resolve_ownership(const std::vector<OwnershipClaim>& claims,
                                  const std::vector<PublishedModel>& models,
                                  const LineageHint& lineage) {
    if (claims.empty() || models.empty()) {
        throw ValidationError("ownership resolution needs at least one claim and one model");
    }
    std::vector<std::string> parties;
    std::map<std::string, std::map<std::string, Verdict>> evidence;
    for (const auto& claim : claims) {
        if (std::find(parties.begin(), parties.end(), claim.party_id) != parties.end()) {
            throw ValidationError("party " + claim.party_id + " submitted more than one claim");
        }
        parties.push_back(claim.party_id);
        for (const auto& model : models) {
            if (!model.client) {
                throw ValidationError("model " + model.model_id + " has no endpoint");
            }
            evidence[claim.party_id][model.model_id] =
                verify(*model.client, claim.chain, claim.key, model.options).verdict;
        }
    }
    std::vector<std::pair<std::string, std::optional<std::string>>> ids;
    for (const auto& m : models) ids.emplace_back(m.model_id, m.publisher);
    return resolve_from_evidence(parties, ids, evidence, lineage);
}

}  // namespace chainhash
