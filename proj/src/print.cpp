#include "polybridge/syntax.hpp"

namespace polybridge::src {

namespace {

// 0 expression, 1 sum, 2 application, 3 prefix, 4 postfix, 5 atom
int level(const Expr& e) {
  switch (e.op) {
    case Op::Lam: case Op::TyLam: case Op::LocLam: case Op::LetBang: case Op::LetPair: case Op::LetUnit:
    case Op::Unpack: case Op::If: case Op::If0: case Op::Match: case Op::Assign: case Op::Boundary:
    case Op::Foreign:
      return 0;
    case Op::Add: return 1;
    case Op::App: return 2;
    case Op::Fst: case Op::Snd: case Op::Inl: case Op::Inr: case Op::Ref: case Op::Deref: case Op::Bang:
    case Op::Dupl: case Op::Drop: case Op::New: case Op::Free: case Op::Swap:
      return 3;
    case Op::Index: case Op::TyApp: case Op::LocApp: case Op::Proj1: case Op::Proj2:
      return 4;
    case Op::Int: return e.num < 0 ? 3 : 5;
    default: return 5;
  }
}

std::string mode_text(Mode m) { return m == Mode::Stat ? "@stat" : "@dyn"; }

void pr(const Expr& e, int prec, std::string& out) {
  bool paren = level(e) < prec;
  if (paren) out += '(';
  auto kid = [&](std::size_t i, int p) { pr(*e.kids[i], p, out); };
  switch (e.op) {
    case Op::Unit: out += "()"; break;
    case Op::True: out += "true"; break;
    case Op::False: out += "false"; break;
    case Op::Int: out += std::to_string(e.num); break;
    case Op::Var: out += e.name; break;
    case Op::AVar: out += e.name + mode_text(e.mode); break;
    case Op::Lam:
      out += "\\" + e.name;
      if (e.lang == Lang::Affi) out += mode_text(e.mode);
      out += ":" + print_type(e.ann) + ". ";
      kid(0, 0);
      break;
    case Op::TyLam:
    case Op::LocLam:
      out += "/\\" + e.name + ". ";
      kid(0, 0);
      break;
    case Op::App:
      kid(0, 2);
      out += ' ';
      if (e.kids[1]->op == Op::Array) {
        out += '(';
        kid(1, 0);
        out += ')';
      } else {
        kid(1, 4);
      }
      break;
    case Op::Pair:
      out += '(';
      kid(0, 0);
      out += ", ";
      kid(1, 0);
      out += ')';
      break;
    case Op::WithPair:
      out += '<';
      kid(0, 0);
      out += ", ";
      kid(1, 0);
      out += '>';
      break;
    case Op::Pack:
      out += "<" + e.name + ", ";
      kid(0, 0);
      out += '>';
      break;
    case Op::Fst: out += "fst "; kid(0, 3); break;
    case Op::Snd: out += "snd "; kid(0, 3); break;
    case Op::Inl: out += "inl[" + print_type(e.ann) + "] "; kid(0, 3); break;
    case Op::Inr: out += "inr[" + print_type(e.ann) + "] "; kid(0, 3); break;
    case Op::Ref: out += "ref "; kid(0, 3); break;
    case Op::Deref: case Op::Bang: out += "!"; kid(0, 3); break;
    case Op::Dupl: out += "dupl "; kid(0, 3); break;
    case Op::Drop: out += "drop "; kid(0, 3); break;
    case Op::New: out += "new "; kid(0, 3); break;
    case Op::Free: out += "free "; kid(0, 3); break;
    case Op::Swap:
      out += "swap ";
      kid(0, 4);
      out += ' ';
      kid(1, 4);
      out += ' ';
      kid(2, 4);
      break;
    case Op::Match:
      out += "match ";
      kid(0, 1);
      out += " " + e.name + "{";
      kid(1, 0);
      out += "} " + e.name2 + "{";
      kid(2, 0);
      out += '}';
      break;
    case Op::If:
    case Op::If0:
      out += e.op == Op::If ? "if " : "if0 ";
      kid(0, 0);
      out += " then ";
      kid(1, 0);
      out += " else ";
      kid(2, 0);
      break;
    case Op::Assign:
      kid(0, 1);
      out += " := ";
      kid(1, 1);
      break;
    case Op::Array:
      if (e.kids.empty()) {
        out += "[:" + print_type(e.ann) + "]";
      } else {
        out += '[';
        for (std::size_t i = 0; i < e.kids.size(); ++i) {
          if (i) out += ", ";
          kid(i, 0);
        }
        out += ']';
      }
      break;
    case Op::Index:
      kid(0, 4);
      out += '[';
      kid(1, 0);
      out += ']';
      break;
    case Op::Add:
      kid(0, 1);
      out += " + ";
      kid(1, 2);
      break;
    case Op::TyApp:
      kid(0, 4);
      out += "[" + print_type(e.ann) + "]";
      break;
    case Op::LocApp:
      kid(0, 4);
      out += "[" + e.name + "]";
      break;
    case Op::Proj1: kid(0, 4); out += ".1"; break;
    case Op::Proj2: kid(0, 4); out += ".2"; break;
    case Op::LetBang:
      out += "let !" + e.name + " = ";
      kid(0, 0);
      out += " in ";
      kid(1, 0);
      break;
    case Op::LetUnit:
      out += "let () = ";
      kid(0, 0);
      out += " in ";
      kid(1, 0);
      break;
    case Op::LetPair:
      out += "let (" + e.name;
      if (e.lang == Lang::Affi) out += mode_text(e.mode);
      out += ", " + e.name2;
      if (e.lang == Lang::Affi) out += mode_text(e.mode2);
      out += ") = ";
      kid(0, 0);
      out += " in ";
      kid(1, 0);
      break;
    case Op::Unpack:
      out += "let <" + e.name + ", " + e.name2 + "> = ";
      kid(0, 0);
      out += " in ";
      kid(1, 0);
      break;
    case Op::Boundary:
      out += lang_tag(e.kids[0]->lang);
      out += "\xE2\x9F\xAA";
      kid(0, 0);
      out += "\xE2\x9F\xAB : " + print_type(e.ann);
      break;
    case Op::Foreign:
      out += lang_tag(e.kids[0]->lang);
      out += "\xE2\x9F\xA8";
      kid(0, 0);
      out += "\xE2\x9F\xA9 : " + print_type(e.ann);
      break;
  }
  if (paren) out += ')';
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  pr(e, 0, out);
  return out;
}

}  // namespace polybridge::src
