#pragma once

// Assembly of quorum-sensing networks: groups of nodes coupled through shared
// media, diffusively linked media graphs, and directly coupled node networks.
// The assembled object owns the flattened state layout.

#include "qsync/dynsys.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

namespace qsync {

/// Homogeneous population of nodes attached to one medium.
struct NodeGroupSpec {
    std::string group_id;
    int node_dim = 0;
    int count = 0;
    NodeField field;            // f_p(x, z, t)
    MediumInput medium_input;   // u_p; empty eval means no contribution to psi
};

/// Aggregation over the stacked states of all nodes attached to a medium.
using Aggregation = std::function<Vec(const std::vector<Vec>&)>;

struct MediumSpec {
    std::string medium_id;
    int dim = 0;
    MediumField field;                      // g_p(z, psi, t)
    Aggregation custom_aggregation;         // optional Psi; default is sum of u_p(x_i)
    std::optional<PeriodicSignal> forcing;  // additive r(t)
};

/// Diffusive links between media: z_p receives sum_{j in N_p} [phi_p(z_j) - phi_p(z_p)].
struct MediaGraph {
    std::vector<std::vector<int>> neighbors;  // in-neighbors per medium
    std::vector<DiffusiveCoupling> coupling;  // phi_p per medium
    bool directed = false;

    static MediaGraph none(std::size_t medium_count) {
        MediaGraph g;
        g.neighbors.assign(medium_count, {});
        return g;
    }
};

/// Offsets of the flattened state vector: groups in declaration order with
/// nodes contiguous, media last.
struct StateLayout {
    struct GroupBlock {
        std::string id;
        int offset = 0;
        int count = 0;
        int node_dim = 0;
    };
    struct MediumBlock {
        std::string id;
        int offset = 0;
        int dim = 0;
    };

    std::vector<GroupBlock> groups;
    std::vector<MediumBlock> media;
    int total_dim = 0;

    int node_offset(std::size_t group, int node) const {
        return groups[group].offset + node * groups[group].node_dim;
    }
    int medium_offset(std::size_t medium) const { return media[medium].offset; }

    int group_index(const std::string& id) const {
        for (std::size_t p = 0; p < groups.size(); ++p)
            if (groups[p].id == id) return static_cast<int>(p);
        throw std::invalid_argument("layout: unknown group '" + id + "'");
    }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        out.reserve(total_dim);
        for (const auto& g : groups)
            for (int i = 0; i < g.count; ++i)
                for (int k = 0; k < g.node_dim; ++k)
                    out.push_back(g.id + "." + std::to_string(i) + ".x" + std::to_string(k));
        for (const auto& m : media)
            for (int k = 0; k < m.dim; ++k)
                out.push_back(m.id + ".z" + std::to_string(k));
        return out;
    }
};

namespace detail {

/// Samples the Jacobian of a coupling map and rejects maps whose Jacobian is
/// not diagonal with nonnegative diagonal entries.
inline void check_diagonal_nonneg_jacobian(const DiffusiveCoupling& c, const char* who) {
    if (!c.eval) throw std::invalid_argument(std::string(who) + ": coupling has no eval");
    const Vec lo = Vec::Constant(c.dim, -8.0);
    const Vec hi = Vec::Constant(c.dim, 8.0);
    for (const Vec& z : halton_box_points(lo, hi, 48)) {
        const Mat j = fd_jacobian(c.eval, z, c.dim);
        for (Eigen::Index r = 0; r < j.rows(); ++r) {
            for (Eigen::Index q = 0; q < j.cols(); ++q) {
                if (r == q) {
                    if (j(r, q) < -1e-8)
                        throw std::invalid_argument(std::string(who) + ": coupling '" + c.id +
                                                    "' has a negative diagonal Jacobian entry");
                } else if (std::abs(j(r, q)) > 1e-6) {
                    throw std::invalid_argument(std::string(who) + ": coupling '" + c.id +
                                                "' has a non-diagonal Jacobian");
                }
            }
        }
    }
}

}  // namespace detail

/// Immutable assembled network. Evaluation is pure and reentrant.
class QuorumNetwork {
public:
    QuorumNetwork(std::vector<NodeGroupSpec> groups, std::vector<MediumSpec> media,
                  MediaGraph graph, std::vector<int> attachment)
        : groups_(std::move(groups)),
          media_(std::move(media)),
          graph_(std::move(graph)),
          attachment_(std::move(attachment)) {
        validate();
        build_layout();
    }

    const StateLayout& layout() const { return layout_; }
    const std::vector<NodeGroupSpec>& groups() const { return groups_; }
    const std::vector<MediumSpec>& media() const { return media_; }
    const MediaGraph& graph() const { return graph_; }
    int medium_of_group(std::size_t p) const { return attachment_[p]; }
    int dim() const { return layout_.total_dim; }

    /// Coordinates carrying node states (everything before the media blocks).
    int node_dim_total() const { return layout_.media.empty() ? dim() : layout_.media.front().offset; }

    Vec eval(const Vec& state, double t) const {
        if (state.size() != dim())
            throw std::invalid_argument("QuorumNetwork::eval: state dimension mismatch");
        Vec out(dim());
        for (std::size_t p = 0; p < groups_.size(); ++p) {
            const auto& g = groups_[p];
            const auto zm = medium_state(state, attachment_[p]);
            for (int i = 0; i < g.count; ++i) {
                const auto xi = state.segment(layout_.node_offset(p, i), g.node_dim);
                out.segment(layout_.node_offset(p, i), g.node_dim) = g.field.eval(xi, zm, t);
            }
        }
        for (std::size_t m = 0; m < media_.size(); ++m) {
            const auto& spec = media_[m];
            const auto zm = medium_state(state, static_cast<int>(m));
            Vec rhs = spec.field.eval(zm, aggregate_input(state, m), t);
            for (int j : graph_.neighbors[m]) {
                const auto& phi = graph_.coupling[m];
                rhs += phi.eval(medium_state(state, j)) - phi.eval(zm);
            }
            if (spec.forcing) rhs += spec.forcing->eval(t);
            out.segment(layout_.medium_offset(m), spec.dim) = rhs;
        }
        return out;
    }

    /// The flattened field as a plain VectorField (Jacobian via finite differences).
    VectorField field() const {
        VectorField f;
        f.dim = dim();
        f.eval = [net = *this](const Vec& x, double t) { return net.eval(x, t); };
        return f;
    }

    /// Aggregated medium input Psi evaluated at the given full network state.
    Vec aggregate_input(const Vec& state, std::size_t m) const {
        const auto& spec = media_[m];
        if (spec.custom_aggregation) {
            std::vector<Vec> stacked;
            for (std::size_t p = 0; p < groups_.size(); ++p) {
                if (attachment_[p] != static_cast<int>(m)) continue;
                for (int i = 0; i < groups_[p].count; ++i)
                    stacked.push_back(state.segment(layout_.node_offset(p, i), groups_[p].node_dim));
            }
            return spec.custom_aggregation(stacked);
        }
        Vec psi = Vec::Zero(spec.field.input_dim > 0 ? spec.field.input_dim : spec.dim);
        for (std::size_t p = 0; p < groups_.size(); ++p) {
            if (attachment_[p] != static_cast<int>(m)) continue;
            const auto& u = groups_[p].medium_input;
            if (!u.eval) continue;
            for (int i = 0; i < groups_[p].count; ++i)
                psi += u.eval(state.segment(layout_.node_offset(p, i), groups_[p].node_dim));
        }
        return psi;
    }

    Eigen::Ref<const Vec> medium_state(const Vec& state, int m) const {
        return state.segment(layout_.medium_offset(m), media_[m].dim);
    }

    bool has_custom_aggregation() const {
        return std::any_of(media_.begin(), media_.end(),
                           [](const MediumSpec& m) { return static_cast<bool>(m.custom_aggregation); });
    }

private:
    void validate() const {
        if (groups_.empty() || media_.empty())
            throw std::invalid_argument("assemble_quorum: need at least one group and one medium");
        if (attachment_.size() != groups_.size())
            throw std::invalid_argument("assemble_quorum: attachment map size mismatch");
        for (std::size_t p = 0; p < groups_.size(); ++p) {
            const auto& g = groups_[p];
            if (g.count < 1) throw std::invalid_argument("assemble_quorum: group count must be >= 1");
            if (g.node_dim < 1 || g.field.state_dim != g.node_dim)
                throw std::invalid_argument("assemble_quorum: node field dimension mismatch in group '" +
                                            g.group_id + "'");
            const int m = attachment_[p];
            if (m < 0 || m >= static_cast<int>(media_.size()))
                throw std::invalid_argument("assemble_quorum: group '" + g.group_id +
                                            "' attached to unknown medium");
            if (g.field.medium_dim != media_[m].dim)
                throw std::invalid_argument("assemble_quorum: group '" + g.group_id +
                                            "' node field medium dimension mismatch");
            if (g.medium_input.eval) {
                if (g.medium_input.node_dim != g.node_dim ||
                    g.medium_input.medium_dim != media_[m].dim)
                    throw std::invalid_argument("assemble_quorum: medium input dimensions mismatch in '" +
                                                g.group_id + "'");
            }
        }
        for (const auto& m : media_)
            if (m.dim < 1 || m.field.state_dim != m.dim)
                throw std::invalid_argument("assemble_quorum: medium field dimension mismatch in '" +
                                            m.medium_id + "'");
        if (graph_.neighbors.size() != media_.size())
            throw std::invalid_argument("assemble_quorum: media graph size mismatch");
        bool has_edges = false;
        for (std::size_t m = 0; m < graph_.neighbors.size(); ++m) {
            for (int j : graph_.neighbors[m]) {
                has_edges = true;
                if (j < 0 || j >= static_cast<int>(media_.size()) || j == static_cast<int>(m))
                    throw std::invalid_argument("assemble_quorum: invalid media edge");
                if (!graph_.directed) {
                    const auto& back = graph_.neighbors[j];
                    if (std::find(back.begin(), back.end(), static_cast<int>(m)) == back.end())
                        throw std::invalid_argument(
                            "assemble_quorum: media graph not symmetric (mark it directed if intended)");
                }
            }
        }
        if (has_edges) {
            if (graph_.coupling.size() != media_.size())
                throw std::invalid_argument("assemble_quorum: media coupling per medium required");
            for (std::size_t m = 0; m < media_.size(); ++m) {
                if (graph_.neighbors[m].empty()) continue;
                if (graph_.coupling[m].dim != media_[m].dim)
                    throw std::invalid_argument("assemble_quorum: media coupling dimension mismatch");
                detail::check_diagonal_nonneg_jacobian(graph_.coupling[m], "assemble_quorum");
            }
        }
        for (const auto& m : media_)
            if (m.forcing && m.forcing->dim != m.dim)
                throw std::invalid_argument("assemble_quorum: forcing dimension mismatch on '" +
                                            m.medium_id + "'");
    }

    void build_layout() {
        int off = 0;
        for (const auto& g : groups_) {
            layout_.groups.push_back({g.group_id, off, g.count, g.node_dim});
            off += g.count * g.node_dim;
        }
        for (const auto& m : media_) {
            layout_.media.push_back({m.medium_id, off, m.dim});
            off += m.dim;
        }
        layout_.total_dim = off;
    }

    std::vector<NodeGroupSpec> groups_;
    std::vector<MediumSpec> media_;
    MediaGraph graph_;
    std::vector<int> attachment_;
    StateLayout layout_;
};

inline QuorumNetwork assemble_quorum(std::vector<NodeGroupSpec> groups,
                                     std::vector<MediumSpec> media, MediaGraph graph,
                                     std::vector<int> attachment) {
    return QuorumNetwork(std::move(groups), std::move(media), std::move(graph),
                         std::move(attachment));
}

// ---------------------------------------------------------------------------
// Structural input-equivalence of the autonomous level (media together with
// their attached populations).
// ---------------------------------------------------------------------------

struct InputEquivalenceResult {
    bool equivalent = true;        // all same-dynamics media ended in one class
    std::vector<int> class_of;     // medium index -> equivalence class
    int class_count = 0;
    std::string witness;           // first distinguishing feature on failure
};

/// Partition media into classes by (medium dynamics, attached population,
/// in-neighborhood couplings), refined until stable. Forcing inputs are not
/// part of the structural signature.
inline InputEquivalenceResult input_equivalence_check(const QuorumNetwork& net) {
    const auto& media = net.media();
    const std::size_t m_count = media.size();

    std::vector<std::string> base(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        std::vector<std::string> pop;
        for (std::size_t p = 0; p < net.groups().size(); ++p) {
            if (net.medium_of_group(p) != static_cast<int>(m)) continue;
            const auto& g = net.groups()[p];
            pop.push_back(g.field.dynamics_id + "#" + std::to_string(g.count) + "@" +
                          g.medium_input.id);
        }
        std::sort(pop.begin(), pop.end());
        std::ostringstream sig;
        sig << media[m].field.dynamics_id << "|dim" << media[m].dim << "|";
        for (const auto& s : pop) sig << s << ";";
        base[m] = sig.str();
    }

    std::vector<int> cls(m_count, 0);
    auto assign_classes = [&](const std::vector<std::string>& sigs) {
        std::map<std::string, int> ids;
        std::vector<int> out(m_count);
        for (std::size_t m = 0; m < m_count; ++m)
            out[m] = ids.emplace(sigs[m], static_cast<int>(ids.size())).first->second;
        return out;
    };
    cls = assign_classes(base);

    for (std::size_t iter = 0; iter < m_count; ++iter) {
        std::vector<std::string> refined(m_count);
        for (std::size_t m = 0; m < m_count; ++m) {
            std::vector<std::string> in;
            for (int j : net.graph().neighbors[m]) {
                const std::string phi = net.graph().coupling.empty()
                                            ? std::string("-")
                                            : net.graph().coupling[m].id;
                in.push_back(phi + "<" + std::to_string(cls[j]));
            }
            std::sort(in.begin(), in.end());
            std::ostringstream sig;
            sig << cls[m] << "|";
            for (const auto& s : in) sig << s << ";";
            refined[m] = sig.str();
        }
        auto next = assign_classes(refined);
        if (next == cls) break;
        cls = next;
    }

    InputEquivalenceResult res;
    res.class_of = cls;
    res.class_count = 1 + (m_count ? *std::max_element(cls.begin(), cls.end()) : -1);
    for (std::size_t a = 0; a < m_count && res.equivalent; ++a) {
        for (std::size_t b = a + 1; b < m_count; ++b) {
            if (media[a].field.dynamics_id != media[b].field.dynamics_id) continue;
            if (cls[a] != cls[b]) {
                res.equivalent = false;
                res.witness = "media '" + media[a].medium_id + "' and '" + media[b].medium_id +
                              "' share dynamics '" + media[a].field.dynamics_id +
                              "' but differ structurally (" +
                              (base[a] != base[b] ? "attached population or dimension"
                                                  : "in-neighborhood couplings") +
                              ")";
                break;
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Directly coupled networks: heterogeneous nodes with diffusive node-to-node
// links over an undirected adjacency.
// ---------------------------------------------------------------------------

struct CoupledNetworkSpec {
    std::vector<VectorField> group_dynamics;        // f_gamma per group
    std::vector<DiffusiveCoupling> group_coupling;  // h_gamma per group
    std::vector<int> gamma;                         // node index -> group index
    std::vector<std::vector<int>> neighbors;        // N_i per node
};

class CoupledNetwork {
public:
    explicit CoupledNetwork(CoupledNetworkSpec spec) : spec_(std::move(spec)) {
        validate();
        int off = 0;
        for (int g : spec_.gamma) {
            offsets_.push_back(off);
            off += spec_.group_dynamics[g].dim;
        }
        total_dim_ = off;
    }

    int dim() const { return total_dim_; }
    int node_count() const { return static_cast<int>(spec_.gamma.size()); }
    int node_offset(int i) const { return offsets_[i]; }
    int node_dim(int i) const { return spec_.group_dynamics[spec_.gamma[i]].dim; }
    const CoupledNetworkSpec& spec() const { return spec_; }

    Vec eval(const Vec& state, double t) const {
        Vec out(total_dim_);
        for (int i = 0; i < node_count(); ++i) {
            const int g = spec_.gamma[i];
            const auto xi = state.segment(offsets_[i], node_dim(i));
            Vec rhs = spec_.group_dynamics[g].eval(xi, t);
            const auto& h = spec_.group_coupling[g];
            for (int j : spec_.neighbors[i])
                rhs += h.eval(state.segment(offsets_[j], node_dim(j))) - h.eval(xi);
            out.segment(offsets_[i], node_dim(i)) = rhs;
        }
        return out;
    }

    VectorField field() const {
        VectorField f;
        f.dim = total_dim_;
        f.eval = [net = *this](const Vec& x, double t) { return net.eval(x, t); };
        return f;
    }

    /// Graph Laplacian L (zero row sums, unit edge weights).
    Mat laplacian() const {
        const int n = node_count();
        Mat l = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            l(i, i) = static_cast<double>(spec_.neighbors[i].size());
            for (int j : spec_.neighbors[i]) l(i, j) -= 1.0;
        }
        return l;
    }

    /// Block matrix with block (i,j) = l_ij * dh_{gamma(i)}/dx evaluated at x_j.
    /// The network Jacobian is blockdiag(df_gamma/dx) minus this matrix.
    Mat coupling_jacobian(const Vec& state) const {
        const Mat l = laplacian();
        Mat out = Mat::Zero(total_dim_, total_dim_);
        for (int i = 0; i < node_count(); ++i) {
            const auto& h = spec_.group_coupling[spec_.gamma[i]];
            for (int j = 0; j < node_count(); ++j) {
                if (l(i, j) == 0.0) continue;
                const Mat jac = detail::fd_jacobian(h.eval, state.segment(offsets_[j], node_dim(j)),
                                                    h.dim);
                out.block(offsets_[i], offsets_[j], node_dim(i), node_dim(j)) = l(i, j) * jac;
            }
        }
        return out;
    }

private:
    void validate() const {
        if (spec_.group_dynamics.empty() || spec_.gamma.empty())
            throw std::invalid_argument("assemble_coupled: empty specification");
        if (spec_.group_coupling.size() != spec_.group_dynamics.size())
            throw std::invalid_argument("assemble_coupled: one coupling map per group required");
        if (spec_.neighbors.size() != spec_.gamma.size())
            throw std::invalid_argument("assemble_coupled: neighbor list size mismatch");
        for (int g : spec_.gamma)
            if (g < 0 || g >= static_cast<int>(spec_.group_dynamics.size()))
                throw std::invalid_argument("assemble_coupled: node assigned to unknown group");
        for (std::size_t g = 0; g < spec_.group_dynamics.size(); ++g) {
            if (spec_.group_coupling[g].dim != spec_.group_dynamics[g].dim)
                throw std::invalid_argument("assemble_coupled: coupling dimension mismatch");
            detail::check_diagonal_nonneg_jacobian(spec_.group_coupling[g], "assemble_coupled");
        }
        const int n = static_cast<int>(spec_.gamma.size());
        for (int i = 0; i < n; ++i) {
            for (int j : spec_.neighbors[i]) {
                if (j < 0 || j >= n || j == i)
                    throw std::invalid_argument("assemble_coupled: invalid edge");
                if (spec_.group_dynamics[spec_.gamma[j]].dim !=
                    spec_.group_dynamics[spec_.gamma[i]].dim)
                    throw std::invalid_argument(
                        "assemble_coupled: coupled nodes must share state dimension");
                const auto& back = spec_.neighbors[j];
                if (std::find(back.begin(), back.end(), i) == back.end())
                    throw std::invalid_argument("assemble_coupled: adjacency not symmetric");
            }
        }
    }

    CoupledNetworkSpec spec_;
    std::vector<int> offsets_;
    int total_dim_ = 0;
};

inline CoupledNetwork assemble_coupled(CoupledNetworkSpec spec) {
    return CoupledNetwork(std::move(spec));
}

}  // namespace qsync
