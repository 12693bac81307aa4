#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "schemabind/errors.hpp"
#include "schemabind/textio.hpp"

namespace schemabind {

struct TemplateToken {
  bool is_role = false;
  std::string text;  // frame word, or role id for slots
};

struct State {
  std::string id;
  std::vector<TemplateToken> tokens;
  std::vector<int> successors;  // uniform transition probability over this list
  int line = 0;
};

// Parsed story state machine. States keep file order; roles keep first
// appearance order.
struct SchemaGraph {
  std::vector<State> states;
  int start = -1;
  std::vector<std::string> roles;
  std::vector<std::string> queries;

  int state_index(const std::string& id) const {
    for (size_t i = 0; i < states.size(); ++i)
      if (states[i].id == id) return static_cast<int>(i);
    return -1;
  }

  int terminal() const {
    for (size_t i = 0; i < states.size(); ++i)
      if (states[i].successors.empty()) return static_cast<int>(i);
    return -1;
  }

  static std::string role_of_query(const std::string& query) {
    return query.size() > 1 && query[0] == 'Q' ? query.substr(1) : query;
  }

  std::vector<std::string> frame_words() const {
    std::vector<std::string> words;
    std::unordered_set<std::string> seen;
    for (const auto& s : states)
      for (const auto& t : s.tokens)
        if (!t.is_role && seen.insert(t.text).second) words.push_back(t.text);
    return words;
  }

  bool is_acyclic() const {
    // colors: 0 unvisited, 1 on stack, 2 done
    std::vector<int> color(states.size(), 0);
    std::vector<int> stack;
    for (size_t root = 0; root < states.size(); ++root) {
      if (color[root]) continue;
      stack.push_back(static_cast<int>(root));
      while (!stack.empty()) {
        int s = stack.back();
        if (color[s] == 0) {
          color[s] = 1;
          for (int nxt : states[s].successors) {
            if (color[nxt] == 1) return false;
            if (color[nxt] == 0) stack.push_back(nxt);
          }
        } else {
          if (color[s] == 1) color[s] = 2;
          stack.pop_back();
        }
      }
    }
    return true;
  }

  // All root-to-terminal paths as state index sequences. Only valid for
  // acyclic graphs.
  std::vector<std::vector<int>> enumerate_paths() const {
    if (!is_acyclic()) throw DataError("unsupported enumeration: schema graph is cyclic");
    std::vector<std::vector<int>> paths;
    std::vector<int> current{start};
    enumerate_rec(start, current, paths);
    return paths;
  }

  std::vector<std::string> roles_on_path(const std::vector<int>& path) const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (int s : path)
      for (const auto& t : states[s].tokens)
        if (t.is_role && seen.insert(t.text).second) out.push_back(t.text);
    return out;
  }

  std::vector<std::string> queries_on_path(const std::vector<int>& path) const {
    auto present = roles_on_path(path);
    std::vector<std::string> out;
    for (const auto& q : queries) {
      auto role = role_of_query(q);
      if (std::find(present.begin(), present.end(), role) != present.end()) out.push_back(q);
    }
    return out;
  }

  int path_token_count(const std::vector<int>& path) const {
    int n = 0;
    for (int s : path) n += static_cast<int>(states[s].tokens.size());
    return n;
  }

  int max_story_tokens() const {
    int best = 0;
    for (const auto& p : enumerate_paths()) best = std::max(best, path_token_count(p));
    return best;
  }

  // Fixed input length shared across one experiment: longest story plus one
  // inserted nonsense word plus the trailing query token.
  int input_length() const { return max_story_tokens() + 2; }

 private:
  void enumerate_rec(int s, std::vector<int>& current, std::vector<std::vector<int>>& paths) const {
    if (states[s].successors.empty()) {
      paths.push_back(current);
      return;
    }
    for (int nxt : states[s].successors) {
      current.push_back(nxt);
      enumerate_rec(nxt, current, paths);
      current.pop_back();
    }
  }
};

// Sum over all root-to-terminal paths of the number of answerable queries.
inline long enumerate_distinguishable(const SchemaGraph& g) {
  long total = 0;
  for (const auto& path : g.enumerate_paths())
    total += static_cast<long>(g.queries_on_path(path).size());
  return total;
}

// Line-oriented DSL:
//   start <id>
//   state <id>: <tok> [<Role>] ... -> <succ1>|<succ2>|...
//   query Q<Role>
//   # comment
// A state without "->" is terminal. Transition probabilities are uniform
// over the successor list.
inline SchemaGraph parse_schema(const std::string& text) {
  SchemaGraph g;
  std::string start_id;
  int start_line = 0;
  struct PendingState {
    std::vector<std::string> succ_ids;
    int line;
    int succ_col;
  };
  std::vector<PendingState> pending;
  std::unordered_map<std::string, int> index;

  auto lines = split(text, '\n');
  for (size_t li = 0; li < lines.size(); ++li) {
    int lineno = static_cast<int>(li) + 1;
    std::string line = lines[li];
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto body = std::string(trim(line));
    if (body.empty()) continue;

    if (body.rfind("start ", 0) == 0) {
      if (!start_id.empty()) throw ParseError("duplicate start directive", lineno, 1);
      start_id = std::string(trim(body.substr(6)));
      start_line = lineno;
      if (start_id.empty()) throw ParseError("start directive needs a state id", lineno, 1);
      continue;
    }
    if (body.rfind("query ", 0) == 0) {
      auto q = std::string(trim(body.substr(6)));
      if (q.size() < 2 || q[0] != 'Q') throw ParseError("query id must look like Q<Role>: " + q, lineno, 1);
      if (std::find(g.queries.begin(), g.queries.end(), q) != g.queries.end())
        throw ParseError("duplicate query " + q, lineno, 1);
      g.queries.push_back(q);
      continue;
    }
    if (body.rfind("state ", 0) != 0) throw ParseError("unrecognized directive: " + body, lineno, 1);

    auto colon = body.find(':');
    if (colon == std::string::npos) throw ParseError("state line missing ':'", lineno, 1);
    std::string id = std::string(trim(body.substr(6, colon - 6)));
    if (id.empty()) throw ParseError("state line missing id", lineno, 1);
    if (index.count(id)) throw ParseError("duplicate state id " + id, lineno, 1);

    std::string rest = body.substr(colon + 1);
    std::string templ = rest;
    PendingState pend{{}, lineno, 1};
    if (auto arrow = rest.find("->"); arrow != std::string::npos) {
      templ = rest.substr(0, arrow);
      pend.succ_col = static_cast<int>(colon + 1 + arrow) + 1;
      for (auto& succ : split(rest.substr(arrow + 2), '|')) {
        auto sid = std::string(trim(succ));
        if (sid.empty()) throw ParseError("empty successor id", lineno, pend.succ_col);
        pend.succ_ids.push_back(sid);
      }
      if (pend.succ_ids.empty()) throw ParseError("'->' with no successors", lineno, pend.succ_col);
    }

    State st;
    st.id = id;
    st.line = lineno;
    for (auto& tok : split_ws(templ)) {
      if (tok.front() == '[') {
        if (tok.back() != ']' || tok.size() < 3)
          throw ParseError("malformed role slot " + tok, lineno, 1);
        std::string role = tok.substr(1, tok.size() - 2);
        st.tokens.push_back({true, role});
        if (std::find(g.roles.begin(), g.roles.end(), role) == g.roles.end())
          g.roles.push_back(role);
      } else {
        st.tokens.push_back({false, tok});
      }
    }
    if (st.tokens.empty()) throw ParseError("state " + id + " has an empty template", lineno, 1);
    index.emplace(id, static_cast<int>(g.states.size()));
    g.states.push_back(std::move(st));
    pending.push_back(std::move(pend));
  }

  if (g.states.empty()) throw ParseError("schema has no states", 1, 1);
  if (start_id.empty()) throw ParseError("schema has no start directive", 1, 1);
  auto sit = index.find(start_id);
  if (sit == index.end())
    throw ParseError("start references undeclared state " + start_id, start_line, 1);
  g.start = sit->second;

  for (size_t i = 0; i < g.states.size(); ++i) {
    for (const auto& sid : pending[i].succ_ids) {
      auto it = index.find(sid);
      if (it == index.end())
        throw ParseError("transition to undeclared state " + sid, pending[i].line, pending[i].succ_col);
      g.states[i].successors.push_back(it->second);
    }
  }

  // reachability from start
  std::vector<char> reached(g.states.size(), 0);
  std::vector<int> stack{g.start};
  reached[g.start] = 1;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int nxt : g.states[s].successors)
      if (!reached[nxt]) {
        reached[nxt] = 1;
        stack.push_back(nxt);
      }
  }
  for (size_t i = 0; i < g.states.size(); ++i)
    if (!reached[i])
      throw ParseError("unreachable state " + g.states[i].id, g.states[i].line, 1);

  int terminals = 0;
  for (const auto& st : g.states)
    if (st.successors.empty()) ++terminals;
  if (terminals != 1)
    throw ParseError("schema must have exactly one terminal state, found " + std::to_string(terminals),
                     g.states.back().line, 1);

  for (const auto& q : g.queries) {
    auto role = SchemaGraph::role_of_query(q);
    if (std::find(g.roles.begin(), g.roles.end(), role) == g.roles.end())
      throw ParseError("unbound role " + role + " referenced by query " + q, 1, 1);
  }
  return g;
}

}  // namespace schemabind
