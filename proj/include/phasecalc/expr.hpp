#pragma once

// Tiny arithmetic expression parser for config-driven scalar fields.
// Grammar: + - * / ^ with parentheses, unary minus, the variables x and xi,
// the constant pi, and a fixed set of unary functions. Parsed once into an
// AST, evaluated per point.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

namespace phasecalc {

class Expr {
  struct Node {
    virtual ~Node() = default;
    virtual double eval(double x, double xi) const = 0;
  };
  using Ptr = std::shared_ptr<const Node>;

  struct Num : Node {
    double v;
    explicit Num(double v_) : v(v_) {}
    double eval(double, double) const override { return v; }
  };
  struct Var : Node {
    bool is_xi;
    explicit Var(bool b) : is_xi(b) {}
    double eval(double x, double xi) const override { return is_xi ? xi : x; }
  };
  struct Bin : Node {
    char op;
    Ptr a, b;
    Bin(char o, Ptr a_, Ptr b_) : op(o), a(a_), b(b_) {}
    double eval(double x, double xi) const override {
      double u = a->eval(x, xi), v = b->eval(x, xi);
      switch (op) {
        case '+': return u + v;
        case '-': return u - v;
        case '*': return u * v;
        case '/': return u / v;
        default:  return std::pow(u, v);
      }
    }
  };
  struct Neg : Node {
    Ptr a;
    explicit Neg(Ptr a_) : a(a_) {}
    double eval(double x, double xi) const override { return -a->eval(x, xi); }
  };
  struct Fun : Node {
    double (*f)(double);
    Ptr a;
    Fun(double (*f_)(double), Ptr a_) : f(f_), a(a_) {}
    double eval(double x, double xi) const override { return f(a->eval(x, xi)); }
  };

  struct Parser {
    const std::string& s;
    size_t i = 0;
    explicit Parser(const std::string& str) : s(str) {}

    void skip() { while (i < s.size() && std::isspace((unsigned char)s[i])) ++i; }
    bool eat(char c) {
      skip();
      if (i < s.size() && s[i] == c) { ++i; return true; }
      return false;
    }
    [[noreturn]] void fail(const std::string& msg) {
      throw std::invalid_argument("expression parse error at offset " +
                                  std::to_string(i) + ": " + msg + " in '" + s + "'");
    }

    Ptr expr() {
      Ptr a = term();
      for (;;) {
        if (eat('+')) a = std::make_shared<Bin>('+', a, term());
        else if (eat('-')) a = std::make_shared<Bin>('-', a, term());
        else return a;
      }
    }
    Ptr term() {
      Ptr a = unary();
      for (;;) {
        if (eat('*')) a = std::make_shared<Bin>('*', a, unary());
        else if (eat('/')) a = std::make_shared<Bin>('/', a, unary());
        else return a;
      }
    }
    Ptr unary() {
      if (eat('-')) return std::make_shared<Neg>(unary());
      (void)eat('+');
      return power();
    }
    Ptr power() {
      Ptr a = atom();
      if (eat('^')) return std::make_shared<Bin>('^', a, unary());
      return a;
    }
    Ptr atom() {
      skip();
      if (i >= s.size()) fail("unexpected end");
      char c = s[i];
      if (std::isdigit((unsigned char)c) || c == '.') {
        size_t j = 0;
        double v = std::stod(s.substr(i), &j);
        i += j;
        return std::make_shared<Num>(v);
      }
      if (c == '(') {
        ++i;
        Ptr a = expr();
        if (!eat(')')) fail("expected ')'");
        return a;
      }
      if (std::isalpha((unsigned char)c) || c == '_') {
        size_t j = i;
        while (j < s.size() && (std::isalnum((unsigned char)s[j]) || s[j] == '_')) ++j;
        std::string name = s.substr(i, j - i);
        i = j;
        if (name == "x") return std::make_shared<Var>(false);
        if (name == "xi") return std::make_shared<Var>(true);
        if (name == "pi") return std::make_shared<Num>(3.14159265358979323846);
        static const std::map<std::string, double (*)(double)> funs = {
            {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
            {"exp", std::exp},   {"log", std::log},   {"sqrt", std::sqrt},
            {"abs", std::fabs},  {"sinh", std::sinh}, {"cosh", std::cosh},
            {"tanh", std::tanh}, {"erf", std::erf},   {"atan", std::atan}};
        auto it = funs.find(name);
        if (it == funs.end()) fail("unknown identifier '" + name + "'");
        if (!eat('(')) fail("expected '(' after function name");
        Ptr a = expr();
        if (!eat(')')) fail("expected ')'");
        return std::make_shared<Fun>(it->second, a);
      }
      fail(std::string("unexpected character '") + c + "'");
    }
  };

  Ptr root_;
  std::string text_;

 public:
  Expr() = default;
  static Expr parse(const std::string& text) {
    Parser p(text);
    Expr e;
    e.root_ = p.expr();
    p.skip();
    if (p.i != text.size()) p.fail("trailing input");
    e.text_ = text;
    return e;
  }
  bool empty() const { return !root_; }
  const std::string& text() const { return text_; }
  double operator()(double x, double xi = 0) const {
    if (!root_) throw std::logic_error("empty expression");
    return root_->eval(x, xi);
  }
};

}  // namespace phasecalc
