#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "covers.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "int_matrix.hpp"
#include "jacobian.hpp"
#include "smith.hpp"
#include "tower.hpp"

namespace giw {

using json = nlohmann::json;

/// Graph plus per-edge voltages as read from a file; voltages are
/// optional in the format.
struct GraphFile {
    std::shared_ptr<const Graph> graph;
    std::vector<std::optional<Int>> voltages;

    bool has_all_voltages() const {
        for (const auto& v : voltages)
            if (!v)
                return false;
        return true;
    }

    /// Voltage list for cover/tower work; every edge must carry one.
    std::vector<Int> voltage_list() const {
        std::vector<Int> out;
        out.reserve(voltages.size());
        for (std::size_t e = 0; e < voltages.size(); ++e) {
            if (!voltages[e])
                throw ParseError("edge \"" + graph->edge_label(e) +
                                 "\": missing voltage field");
            out.push_back(*voltages[e]);
        }
        return out;
    }
};

namespace detail {

inline Int json_to_int(const json& j, const std::string& where) {
    if (j.is_number_unsigned())
        return Int(j.get<std::uint64_t>());
    if (j.is_number_integer())
        return Int(j.get<std::int64_t>());
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        try {
            if (s.empty())
                throw std::runtime_error("empty");
            return Int(s);
        } catch (const std::exception&) {
            throw ParseError(where + ": not an integer: \"" + s + "\"");
        }
    }
    throw ParseError(where + ": expected an integer (number or decimal string)");
}

// Big values exceed JSON number precision; emit those as strings.
inline json int_to_json(const Int& x) {
    if (x >= Int(std::numeric_limits<std::int64_t>::min()) &&
        x <= Int(std::numeric_limits<std::int64_t>::max()))
        return json(static_cast<std::int64_t>(x));
    return json(x.str());
}

inline json group_to_json(const AbelianGroupStructure& g) {
    json factors = json::array();
    for (const Int& d : g.torsion)
        factors.push_back(int_to_json(d));
    return json{{"free_rank", g.free_rank}, {"torsion", std::move(factors)}};
}

} // namespace detail

inline GraphFile parse_graph_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("top level: expected an object");
    if (!doc.contains("vertices") || !doc["vertices"].is_array())
        throw ParseError("field \"vertices\": expected an array of ids");
    if (!doc.contains("edges") || !doc["edges"].is_array())
        throw ParseError("field \"edges\": expected an array of edge objects");

    std::vector<std::string> vlabels;
    std::map<std::string, std::size_t> vindex;
    for (const auto& v : doc["vertices"]) {
        if (!v.is_string())
            throw ParseError("field \"vertices\": entries must be strings");
        std::string label = v.get<std::string>();
        if (!vindex.emplace(label, vlabels.size()).second)
            throw ParseError("duplicate vertex id \"" + label + "\"");
        vlabels.push_back(std::move(label));
    }

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::string> elabels;
    std::vector<std::optional<Int>> voltages;
    std::map<std::string, std::size_t> eindex;
    std::size_t k = 0;
    for (const auto& e : doc["edges"]) {
        const std::string where = "edge " + std::to_string(k);
        if (!e.is_object())
            throw ParseError(where + ": expected an object");
        std::string label =
            e.contains("id") && e["id"].is_string() ? e["id"].get<std::string>()
                                                    : "e" + std::to_string(k);
        if (!eindex.emplace(label, k).second)
            throw ParseError("duplicate edge id \"" + label + "\"");
        auto endpoint = [&](const char* field) {
            if (!e.contains(field) || !e[field].is_string())
                throw ParseError("edge \"" + label + "\": field \"" + field +
                                 "\" must name a vertex");
            auto it = vindex.find(e[field].get<std::string>());
            if (it == vindex.end())
                throw ParseError("edge \"" + label + "\": unknown vertex \"" +
                                 e[field].get<std::string>() + "\"");
            return it->second;
        };
        edges.emplace_back(endpoint("from"), endpoint("to"));
        if (e.contains("voltage"))
            voltages.emplace_back(
                detail::json_to_int(e["voltage"], "edge \"" + label + "\" voltage"));
        else
            voltages.emplace_back(std::nullopt);
        elabels.push_back(std::move(label));
        ++k;
    }

    GraphFile file;
    file.graph = std::make_shared<Graph>(vlabels.size(), edges, std::move(vlabels),
                                         std::move(elabels));
    file.voltages = std::move(voltages);
    return file;
}

inline GraphFile load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph_json(buf.str());
}

inline std::string write_graph_json(const Graph& g,
                                    const std::vector<Int>* voltages = nullptr) {
    json doc;
    doc["vertices"] = json::array();
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        doc["vertices"].push_back(g.vertex_label(v));
    doc["edges"] = json::array();
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        json edge{{"id", g.edge_label(e)},
                  {"from", g.vertex_label(g.edge_from(e))},
                  {"to", g.vertex_label(g.edge_to(e))}};
        if (voltages)
            edge["voltage"] = detail::int_to_json((*voltages)[e]);
        doc["edges"].push_back(std::move(edge));
    }
    return doc.dump(2) + "\n";
}

inline json jacobian_report_to_json(const JacobianReport& r) {
    json factors = json::array();
    for (const Int& d : r.vertex.torsion)
        factors.push_back(detail::int_to_json(d));
    return json{{"order", r.order.str()},
                {"invariant_factors", std::move(factors)},
                {"vertex_edge_agree", r.agree}};
}

inline json matrix_to_json(const IntMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j)
            row.push_back(detail::int_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

inline std::string factors_semicolon(const AbelianGroupStructure& g) {
    std::string s;
    for (const Int& d : g.torsion) {
        if (!s.empty())
            s += ";";
        s += d.str();
    }
    return s;
}

} // namespace detail

inline json tower_result_to_json(const TowerSpec& spec, const TowerResult& r) {
    json rows = json::array();
    for (const auto& row : r.levels) {
        json jrow{{"n", row.n}, {"vertices", row.vertices}, {"edges", row.edges}};
        if (row.computed) {
            json factors = json::array();
            for (const Int& d : row.direct_route.torsion)
                factors.push_back(detail::int_to_json(d));
            json mfactors = json::array();
            for (const Int& d : row.module_route.torsion)
                mfactors.push_back(detail::int_to_json(d));
            jrow["order"] = row.direct_route.order().str();
            jrow["invariant_factors"] = std::move(factors);
            jrow["e_n"] = row.e_n;
            jrow["route_agree"] = row.route_agree;
            jrow["module_invariant_factors"] = std::move(mfactors);
            jrow["j_module"] = detail::group_to_json(row.j_module);
        } else {
            jrow["error"] = row.error;
        }
        rows.push_back(std::move(jrow));
    }
    json doc{{"p", spec.p.str()},
             {"levels", spec.levels},
             {"rows", std::move(rows)},
             {"all_agree", r.all_agree}};
    if (r.fit) {
        doc["fit"] = json{{"lambda", r.fit->lambda.str()},
                          {"mu", r.fit->mu.str()},
                          {"nu", r.fit->nu.str()},
                          {"n0", r.fit->n0},
                          {"fitted", r.fit->fitted}};
    } else {
        doc["fit"] = nullptr;
    }
    if (!r.fit_note.empty())
        doc["fit_note"] = r.fit_note;
    return doc;
}

inline std::string tower_result_to_csv(const TowerResult& r) {
    std::ostringstream os;
    os << "n,vertices,edges,order,invariant_factors,e_n,route_agree,error\n";
    for (const auto& row : r.levels) {
        os << row.n << "," << row.vertices << "," << row.edges << ",";
        if (row.computed) {
            os << row.direct_route.order().str() << ","
               << detail::factors_semicolon(row.direct_route) << "," << row.e_n << ","
               << (row.route_agree ? "true" : "false") << ",";
        } else {
            std::string msg = row.error;
            for (char& c : msg)
                if (c == ',' || c == '\n')
                    c = ';';
            os << ",,,," << msg;
        }
        os << "\n";
    }
    os << "fit,lambda,mu,nu,n0,fitted,note\n";
    std::string note = r.fit_note;
    for (char& c : note)
        if (c == ',' || c == '\n')
            c = ';';
    if (r.fit)
        os << "fit," << r.fit->lambda.str() << "," << r.fit->mu.str() << ","
           << r.fit->nu.str() << "," << r.fit->n0 << ","
           << (r.fit->fitted ? "true" : "false") << "," << note << "\n";
    else
        os << "fit,,,,,false," << note << "\n";
    return os.str();
}

inline std::string tower_result_to_table(const TowerSpec& spec, const TowerResult& r) {
    std::vector<std::array<std::string, 7>> cells;
    cells.push_back({"n", "vertices", "edges", "order", "factors", "e_n", "routes"});
    for (const auto& row : r.levels) {
        std::array<std::string, 7> c;
        c[0] = std::to_string(row.n);
        c[1] = std::to_string(row.vertices);
        c[2] = std::to_string(row.edges);
        if (row.computed) {
            std::string factors = detail::factors_semicolon(row.direct_route);
            for (char& ch : factors)
                if (ch == ';')
                    ch = ',';
            c[3] = row.direct_route.order().str();
            c[4] = "[" + factors + "]";
            c[5] = std::to_string(row.e_n);
            c[6] = row.route_agree ? "agree" : "DISAGREE";
        } else {
            c[3] = "error: " + row.error;
        }
        cells.push_back(std::move(c));
    }
    std::array<std::size_t, 7> width{};
    for (const auto& c : cells)
        for (std::size_t j = 0; j < 7; ++j)
            width[j] = std::max(width[j], c[j].size());
    std::ostringstream os;
    os << "tower: p = " << spec.p.str() << ", levels 0.." << spec.levels << "\n";
    for (const auto& c : cells) {
        os << " ";
        for (std::size_t j = 0; j < 7; ++j) {
            os << " " << c[j];
            if (j + 1 < 7)
                os << std::string(width[j] - c[j].size(), ' ');
        }
        os << "\n";
    }
    if (r.fit && r.fit->fitted) {
        os << "fit: e_n = " << r.fit->lambda.str() << "*p^n + " << r.fit->mu.str()
           << "*n + " << r.fit->nu.str() << " for n >= " << r.fit->n0 << "\n";
    } else {
        os << "fit: none";
        if (!r.fit_note.empty())
            os << " (" << r.fit_note << ")";
        os << "\n";
    }
    return os.str();
}

} // namespace giw
