#include "partout/rdf/dictionary.hpp"

#include <algorithm>
#include <istream>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>

#include "partout/error.hpp"

namespace partout::rdf {

Dictionary::Dictionary(const Dictionary& other) {
  std::shared_lock lock(other.mutex_);
  terms_ = other.terms_;
  ids_ = other.ids_;
}

Dictionary& Dictionary::operator=(const Dictionary& other) {
  if (this == &other) return *this;
  std::unique_lock lock(mutex_, std::defer_lock);
  std::shared_lock other_lock(other.mutex_, std::defer_lock);
  std::lock(lock, other_lock);
  terms_ = other.terms_;
  ids_ = other.ids_;
  return *this;
}

Dictionary::Dictionary(Dictionary&& other) noexcept
    : terms_(std::move(other.terms_)), ids_(std::move(other.ids_)) {}

Dictionary& Dictionary::operator=(Dictionary&& other) noexcept {
  terms_ = std::move(other.terms_);
  ids_ = std::move(other.ids_);
  return *this;
}

TermId Dictionary::intern(const Term& term) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = ids_.find(term); it != ids_.end()) return it->second;
  }
  std::unique_lock lock(mutex_);
  if (auto it = ids_.find(term); it != ids_.end()) return it->second;
  if (term.is_iri() && term.lexical.empty()) {
    throw std::invalid_argument("empty IRI cannot be interned");
  }
  terms_.push_back(term);
  TermId id = static_cast<TermId>(terms_.size());
  ids_.emplace(term, id);
  return id;
}

std::optional<TermId> Dictionary::find(const Term& term) const {
  std::shared_lock lock(mutex_);
  if (auto it = ids_.find(term); it != ids_.end()) return it->second;
  return std::nullopt;
}

const Term& Dictionary::term(TermId id) const {
  std::shared_lock lock(mutex_);
  if (id == kUnassigned || id > terms_.size()) {
    throw std::out_of_range("unassigned term id " + std::to_string(id));
  }
  return terms_[id - 1];
}

bool Dictionary::contains(TermId id) const {
  std::shared_lock lock(mutex_);
  return id != kUnassigned && id <= terms_.size();
}

std::size_t Dictionary::size() const {
  std::shared_lock lock(mutex_);
  return terms_.size();
}

void Dictionary::write(std::ostream& out) const { write_from(out, 1); }

void Dictionary::write_from(std::ostream& out, TermId from) const {
  std::shared_lock lock(mutex_);
  for (TermId id = std::max<TermId>(from, 1); id <= terms_.size(); ++id) {
    const Term& t = terms_[id - 1];
    out << id << '\t' << (t.is_iri() ? "iri" : "literal") << '\t' << t.lexical << '\n';
  }
}

Dictionary Dictionary::read(std::istream& in) {
  Dictionary dict;
  dict.append(in);
  return dict;
}

void Dictionary::append(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab1 = line.find('\t');
    auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) throw ParseError(line_no, "dictionary record needs three fields");
    TermId id = 0;
    try {
      id = std::stoull(line.substr(0, tab1));
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad dictionary id");
    }
    std::string kind = line.substr(tab1 + 1, tab2 - tab1 - 1);
    Term term;
    if (kind == "iri") {
      term.kind = TermKind::Iri;
    } else if (kind == "literal") {
      term.kind = TermKind::Literal;
    } else {
      throw ParseError(line_no, "unknown term kind '" + kind + "'");
    }
    term.lexical = line.substr(tab2 + 1);
    if (id < next_id()) {
      if (this->term(id) != term) throw ParseError(line_no, "dictionary record conflicts with id " + std::to_string(id));
      continue;
    }
    if (next_id() != id) throw ParseError(line_no, "dictionary ids must be dense and ascending");
    if (intern(term) != id) throw ParseError(line_no, "duplicate dictionary term");
  }
}

bool operator==(const Dictionary& a, const Dictionary& b) {
  if (&a == &b) return true;
  std::shared_lock la(a.mutex_, std::defer_lock);
  std::shared_lock lb(b.mutex_, std::defer_lock);
  std::lock(la, lb);
  return a.terms_ == b.terms_;
}

}  // namespace partout::rdf
