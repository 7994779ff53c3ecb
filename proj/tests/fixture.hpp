#pragma once

// Shared 20-document offline corpus used by the CLI end-to-end tests and the
// acceptance suite.

#include "drk/config.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace fixture {

inline const std::string kProbeSentence = "The quarterly maintenance fee is due on the first business day.";

inline std::vector<std::pair<std::string, std::string>> corpus_docs() {
    std::vector<std::pair<std::string, std::string>> docs;
    const std::vector<std::string> topics = {
        "The lease term runs for five years from the commencement date. Renewal requires written notice.",
        "Rent is payable monthly in advance. Late payments accrue interest at one percent.",
        "The security deposit equals two months of rent. It is refundable after inspection.",
        "Either party may terminate the agreement with ninety days notice. Early exit carries a fee.",
        "The tenant must maintain liability insurance. Certificates are filed with the landlord.",
        "Subletting requires prior written consent. Consent is not unreasonably withheld.",
        "Utilities are paid directly by the tenant. Water charges are shared pro rata.",
        "All disputes are settled by binding arbitration. The venue is the state of incorporation.",
        "Alterations above five thousand dollars require approval. Permits are the tenant's duty.",
        "The landlord inspects the premises twice a year. Notice precedes every inspection.",
        "Parking spaces are assigned by the building manager. Visitor parking is unreserved.",
        "Signage must comply with municipal codes. Approval takes up to thirty days.",
        "Hazardous materials are prohibited on the premises. Violations terminate the lease.",
        "Common area maintenance is billed quarterly. Statements itemize every charge.",
        "Property taxes are the landlord's obligation. Increases above three percent pass through.",
        "The premises are delivered in broom-clean condition. Defects are listed in the annex.",
        "Insurance proceeds are applied to restoration first. Excess funds go to the landlord.",
        "Force majeure suspends both parties' duties. Rent abates during closures.",
        "Notices are delivered by certified mail. Electronic notice is valid if acknowledged.",
    };
    for (std::size_t i = 0; i < topics.size(); ++i)
        docs.emplace_back("doc_" + std::to_string(i) + ".txt", topics[i]);
    // The probe document leads with the sentence the end-to-end ask targets.
    docs.emplace_back("doc_probe.txt",
                      kProbeSentence + " Invoices arrive ten days before the due date. "
                                       "Unpaid fees accrue a two percent surcharge.");
    return docs;
}

// Writes the corpus + manifest + offline config under root; returns the
// config path.
inline std::filesystem::path write_workspace(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    fs::create_directories(root / "src");
    const auto docs = corpus_docs();
    std::ofstream manifest(root / "manifest.jsonl");
    for (const auto& [name, text] : docs) {
        std::ofstream(root / "src" / name) << text;
        manifest << R"({"uri": "src/)" << name << R"(", "format": "plain"})" << "\n";
    }
    manifest.close();

    drk::cli::EngineConfig cfg = drk::cli::EngineConfig::defaults();
    cfg.data_dir = root / "data";
    const auto config_path = root / "config.json";
    cfg.save(config_path);
    return config_path;
}

} // namespace fixture
