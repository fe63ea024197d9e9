#include "polybridge/syntax.hpp"

namespace polybridge::src {

ExprPtr make(Lang l, Op op, std::vector<ExprPtr> kids) {
  auto e = std::make_shared<Expr>();
  e->lang = l;
  e->op = op;
  e->kids = std::move(kids);
  return e;
}

bool same_syntax(const Expr& a, const Expr& b) {
  if (a.lang != b.lang || a.op != b.op || a.num != b.num || a.name != b.name || a.name2 != b.name2) return false;
  if (a.mode != b.mode || a.mode2 != b.mode2) return false;
  if (a.ann.valid() != b.ann.valid()) return false;
  if (a.ann.valid() && !type_equal(a.ann, b.ann)) return false;
  if (a.kids.size() != b.kids.size()) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!same_syntax(*a.kids[i], *b.kids[i])) return false;
  return true;
}

ExprPtr clone(const Expr& e) {
  auto c = std::make_shared<Expr>(e);
  for (auto& k : c->kids) k = clone(*k);
  return c;
}

std::size_t size(const Expr& e) {
  std::size_t n = 1;
  for (const auto& k : e.kids) n += size(*k);
  return n;
}

std::optional<Lang> lang_from_extension(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot == std::string::npos) return std::nullopt;
  std::string ext = path.substr(dot + 1);
  if (ext == "refhl") return Lang::RefHL;
  if (ext == "refll") return Lang::RefLL;
  if (ext == "affi") return Lang::Affi;
  if (ext == "mml") return Lang::MiniML;
  if (ext == "l3") return Lang::L3;
  return std::nullopt;
}

std::optional<Lang> lang_from_name(const std::string& s) {
  if (s == "refhl") return Lang::RefHL;
  if (s == "refll") return Lang::RefLL;
  if (s == "affi") return Lang::Affi;
  if (s == "mml") return Lang::MiniML;
  if (s == "l3") return Lang::L3;
  return std::nullopt;
}

std::optional<Lang> lang_from_tag(const std::string& tag) {
  if (tag == "hl") return Lang::RefHL;
  if (tag == "ll") return Lang::RefLL;
  if (tag == "affi") return Lang::Affi;
  if (tag == "ml") return Lang::MiniML;
  if (tag == "l3") return Lang::L3;
  return std::nullopt;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::Unit: return "unit";
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Int: return "int";
    case Op::Var: return "var";
    case Op::AVar: return "affine-var";
    case Op::Lam: return "lambda";
    case Op::App: return "app";
    case Op::Pair: return "pair";
    case Op::Fst: return "fst";
    case Op::Snd: return "snd";
    case Op::Inl: return "inl";
    case Op::Inr: return "inr";
    case Op::Match: return "match";
    case Op::If: return "if";
    case Op::If0: return "if0";
    case Op::Ref: return "ref";
    case Op::Deref: return "deref";
    case Op::Assign: return "assign";
    case Op::Array: return "array";
    case Op::Index: return "index";
    case Op::Add: return "add";
    case Op::TyLam: return "type-lambda";
    case Op::TyApp: return "type-app";
    case Op::Bang: return "bang";
    case Op::LetBang: return "let-bang";
    case Op::WithPair: return "with-pair";
    case Op::Proj1: return "proj1";
    case Op::Proj2: return "proj2";
    case Op::LetPair: return "let-pair";
    case Op::LetUnit: return "let-unit";
    case Op::Dupl: return "dupl";
    case Op::Drop: return "drop";
    case Op::New: return "new";
    case Op::Free: return "free";
    case Op::Swap: return "swap";
    case Op::LocLam: return "loc-lambda";
    case Op::LocApp: return "loc-app";
    case Op::Pack: return "pack";
    case Op::Unpack: return "unpack";
    case Op::Boundary: return "boundary";
    case Op::Foreign: return "foreign";
  }
  return "?";
}

}  // namespace polybridge::src
