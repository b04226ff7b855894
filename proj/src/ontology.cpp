#include "survadv/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "survadv/errors.hpp"

namespace survadv {

Ontology Ontology::from_edges(
    const std::vector<std::pair<std::string, std::string>>& edges) {
    if (edges.empty()) throw StructureError("ontology has no nodes");

    Ontology o;
    for (const auto& [child, parent] : edges) {
        if (child.empty() || parent.empty())
            throw StructureError("ontology edge with empty id");
        if (child == kRoot)
            throw StructureError("ROOT cannot appear as a child");
        auto [it, inserted] = o.parent_.emplace(child, parent);
        if (!inserted)
            throw StructureError("node '" + child + "' has more than one parent ('" +
                                 it->second + "' and '" + parent + "')");
    }
    // Every referenced parent must itself be declared (or be ROOT).
    for (const auto& [child, parent] : o.parent_) {
        (void)child;
        if (parent != kRoot && !o.parent_.count(parent))
            throw StructureError("parent '" + parent + "' is never declared as a child");
    }
    // Resolve depth and root, detecting cycles by walking each chain to ROOT.
    for (const auto& [node, parent] : o.parent_) {
        (void)parent;
        std::vector<std::string> chain;
        std::string cur = node;
        while (cur != kRoot && !o.depth_.count(cur)) {
            chain.push_back(cur);
            if (chain.size() > o.parent_.size())
                throw StructureError("cycle detected at node '" + node + "'");
            cur = o.parent_.at(cur);
        }
        if (chain.empty()) continue;
        std::size_t base = (cur == kRoot) ? 0 : o.depth_.at(cur);
        std::string root = (cur == kRoot) ? chain.back() : o.root_of_.at(cur);
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            o.depth_[*it] = ++base;
            o.root_of_[*it] = root;
        }
    }
    for (const auto& [child, parent] : o.parent_) {
        if (parent == kRoot)
            o.roots_.push_back(child);
        else
            o.children_[parent].push_back(child);
    }
    std::sort(o.roots_.begin(), o.roots_.end());
    for (auto& [node, kids] : o.children_) {
        (void)node;
        std::sort(kids.begin(), kids.end());
    }
    for (const auto& [node, parent] : o.parent_) {
        (void)parent;
        if (!o.children_.count(node)) o.leaves_.insert(node);
    }
    o.sorted_leaves_.assign(o.leaves_.begin(), o.leaves_.end());
    return o;
}

const std::string& Ontology::parent(const std::string& id) const {
    auto it = parent_.find(id);
    if (it == parent_.end()) throw UnknownCode("unknown ontology node '" + id + "'");
    return it->second;
}

std::size_t Ontology::depth(const std::string& id) const {
    auto it = depth_.find(id);
    if (it == depth_.end()) throw UnknownCode("unknown ontology node '" + id + "'");
    return it->second;
}

std::vector<std::string> Ontology::ancestors(const std::string& id) const {
    std::vector<std::string> out;
    std::string cur = parent(id);
    while (cur != kRoot) {
        out.push_back(cur);
        cur = parent(cur);
    }
    return out;
}

std::vector<CodeId> Ontology::siblings(const CodeId& code) const {
    if (!is_leaf(code)) {
        if (is_node(code))
            throw UnknownCode("'" + code + "' is an internal concept, not a leaf");
        throw UnknownCode("unknown code '" + code + "'");
    }
    const std::string& p = parent(code);
    std::vector<CodeId> out;
    if (p == kRoot) {
        for (const std::string& r : roots_)
            if (r != code && is_leaf(r)) out.push_back(r);
        return out;
    }
    for (const std::string& c : children(p))
        if (c != code && is_leaf(c)) out.push_back(c);
    return out;
}

const std::vector<std::string>& Ontology::children(const std::string& id) const {
    static const std::vector<std::string> kEmpty;
    auto it = children_.find(id);
    return it == children_.end() ? kEmpty : it->second;
}

const std::string& Ontology::root_of(const std::string& id) const {
    auto it = root_of_.find(id);
    if (it == root_of_.end()) throw UnknownCode("unknown ontology node '" + id + "'");
    return it->second;
}

Ontology parse_ontology(const std::string& tsv_text, const std::string& origin) {
    std::vector<std::pair<std::string, std::string>> edges;
    std::istringstream in(tsv_text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size() ||
            line.find('\t', tab + 1) != std::string::npos)
            throw ParseError(origin + ":" + std::to_string(lineno) +
                             ": expected '<child>\\t<parent>', got '" + line + "'");
        edges.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    if (edges.empty())
        throw StructureError(origin + ": ontology file declares no nodes");
    return Ontology::from_edges(edges);
}

Ontology load_ontology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open ontology file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ontology(buf.str(), path);
}

CooccurrenceTable CooccurrenceTable::build(const Cohort& cohort,
                                           CooccurrenceScope scope) {
    CooccurrenceTable t;
    t.scope_ = scope;
    auto count_unit = [&t](const std::set<CodeId>& unit) {
        for (const CodeId& c : unit) {
            t.support_[c] += 1;
            auto& row = t.joint_[c];
            for (const CodeId& s : unit) row[s] += 1;
        }
    };
    for (const Patient& p : cohort.patients) {
        if (scope == CooccurrenceScope::record) {
            std::set<CodeId> unit;
            for (const Visit& v : p.record.visits)
                unit.insert(v.codes.begin(), v.codes.end());
            count_unit(unit);
        } else {
            for (const Visit& v : p.record.visits)
                count_unit(std::set<CodeId>(v.codes.begin(), v.codes.end()));
        }
    }
    return t;
}

std::int64_t CooccurrenceTable::support(const CodeId& code) const {
    auto it = support_.find(code);
    return it == support_.end() ? 0 : it->second;
}

double CooccurrenceTable::conditional(const CodeId& anchor,
                                      const CodeId& candidate) const {
    const std::int64_t n = support(anchor);
    if (n <= 0)
        throw PreconditionViolation("conditional probability undefined: code '" +
                                    anchor + "' has zero support");
    auto row = joint_.find(anchor);
    if (row == joint_.end()) return 0.0;
    auto it = row->second.find(candidate);
    if (it == row->second.end()) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(n);
}

SynonymSet synonym_set(const Ontology& ontology, const CooccurrenceTable& table,
                       const CodeId& anchor, double p,
                       CooccurrenceDirection direction) {
    SynonymSet out;
    out.anchor = anchor;
    std::vector<std::pair<double, CodeId>> passing;
    for (const CodeId& sib : ontology.siblings(anchor)) {
        double prob = 0.0;
        if (direction == CooccurrenceDirection::given_anchor) {
            if (table.support(anchor) <= 0) continue;
            prob = table.conditional(anchor, sib);
        } else {
            if (table.support(sib) <= 0) continue;
            prob = table.conditional(sib, anchor);
        }
        if (prob > p) passing.emplace_back(prob, sib);
    }
    std::sort(passing.begin(), passing.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (const auto& [prob, code] : passing) {
        out.members.push_back(code);
        out.probabilities.push_back(prob);
    }
    return out;
}

std::map<CodeId, SynonymSet> build_synonym_catalog(const Ontology& ontology,
                                                   const CooccurrenceTable& table,
                                                   double p,
                                                   CooccurrenceDirection direction) {
    std::map<CodeId, SynonymSet> catalog;
    for (const CodeId& leaf : ontology.leaves())
        catalog.emplace(leaf, synonym_set(ontology, table, leaf, p, direction));
    return catalog;
}

}  // namespace survadv
