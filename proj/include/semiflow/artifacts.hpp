#pragma once

// Deterministic run artifacts: CSV/DOT/JSON serializers for the domain
// types plus a writer that tracks every file it emits and finishes with a
// manifest.json carrying content hashes.  On failure the writer removes the
// partial outputs it created.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "semiflow/cellgraph.hpp"
#include "semiflow/chafee.hpp"
#include "semiflow/duffing.hpp"
#include "semiflow/inclusion.hpp"
#include "semiflow/omega.hpp"

namespace semiflow {

struct ArtifactEntry {
    std::string path; // relative to the run directory
    std::string hash; // fnv1a64 of the bytes
    std::size_t bytes = 0;
};

class ArtifactWriter {
  public:
    explicit ArtifactWriter(std::filesystem::path dir);
    const std::filesystem::path& dir() const { return dir_; }
    void write_text(const std::string& rel_path, const std::string& content);
    const std::vector<ArtifactEntry>& entries() const { return entries_; }
    // Writes manifest.json (config echo, version, wall time, file table).
    void finalize(const std::string& config_echo, double wall_seconds);
    // Failure path: removes everything this writer created.
    void discard();

  private:
    std::filesystem::path dir_;
    std::vector<ArtifactEntry> entries_;
    bool created_dir_ = false;
};

// ---- CSV ----
std::string trajectory_csv(const TrajectorySample& traj);
std::string duffing_csv(const DuffingTrajectory& traj);
// x,u rows including the Dirichlet boundary zeros.
std::string profile_csv(std::span<const double> u, double length);
std::string dist_history_csv(const std::vector<std::pair<double, double>>& history);
std::string points_csv(const std::vector<std::vector<double>>& points);

// ---- DOT ----
std::string transition_graph_dot(const TransitionGraph& graph,
                                 const std::vector<std::uint32_t>& recurrent);
std::string connection_graph_dot(const ConnectionGraph& graph);

// ---- JSON ----
nlohmann::json chain_json(const EpsChain& chain);
nlohmann::json chain_check_json(const ChainCheck& check);
nlohmann::json graph_summary_json(const TransitionGraph& graph,
                                  const std::vector<std::uint32_t>& recurrent);
nlohmann::json connection_graph_json(const ConnectionGraph& graph);
nlohmann::json equilibria_json(const EquilibriumSet& set, const std::vector<double>& energies,
                               const std::string& map_id);

} // namespace semiflow
