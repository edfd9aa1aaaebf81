#pragma once

#include "haantjes/fields.hpp"

namespace haan {

/// Max-norm residual of an identity together with the largest intermediate
/// magnitude that entered either side. Identity tests accept when
/// residual <= tol * (1 + scale).
struct ResidualReport {
  double residual = 0.0;
  double scale = 0.0;

  bool within(double tol) const { return residual <= tol * (1.0 + scale); }
};

/// Nijenhuis torsion of an operator field at a point, assembled from the
/// value matrix and its Jacobian.
Tensor12 nijenhuis(const OpEval& a);
Tensor12 nijenhuis(const OperatorField& a, const Point& p);

/// Haantjes torsion: the Nijenhuis torsion pushed once through the
/// contraction step below.
Tensor12 haantjes(const OpEval& a);
Tensor12 haantjes(const OperatorField& a, const Point& p);

/// Frolicher-Nijenhuis bracket of two operator fields, evaluated on natural
/// frame pairs; all Lie-bracket terms reduce to first derivatives of the
/// entries.
Tensor12 fn_bracket(const OpEval& a, const OpEval& b);
Tensor12 fn_bracket(const OperatorField& a, const OperatorField& b, const Point& p);

/// One level of the single-operator tower: t -> A^2 t(X,Y) + t(AX,AY)
/// - A(t(X,AY) + t(AX,Y)), as a pure contraction of components.
Tensor12 haantjes_step(const Tensor12& t, const OpEval& a);

/// One level of the binary tower: t -> (AB+BA) t(X,Y) + t(AX,BY) + t(BX,AY)
/// - A(t(X,BY) + t(BX,Y)) - B(t(X,AY) + t(AX,Y)).
Tensor12 binary_step(const Tensor12& t, const OpEval& a, const OpEval& b);

/// Binary Haantjes tensor of a pair (level 2 of the binary tower).
Tensor12 binary_haantjes(const OpEval& a, const OpEval& b);
Tensor12 binary_haantjes(const OperatorField& a, const OperatorField& b, const Point& p);

/// Level-m binary tensor, m >= 1: level 1 is the Frolicher-Nijenhuis
/// bracket, each further level applies binary_step.
Tensor12 binary_level(const OpEval& a, const OpEval& b, int m);
Tensor12 binary_level(const OperatorField& a, const OperatorField& b, int m, const Point& p);

/// Generalized Nijenhuis torsion of level m >= 1 (level 1: Nijenhuis,
/// level 2: Haantjes); equals 2^-m times the binary level-m tensor of (A,A).
Tensor12 tau_level(const OpEval& a, int m);
Tensor12 tau_level(const OperatorField& a, int m, const Point& p);

/// The same tensor through the binomial closed form
///   sum_{p,q=0..m} (-1)^{p+q} C(m,p) C(m,q) A^{p+q}[A^{m-p}X, A^{m-q}Y],
/// an independent evaluation route. Exact integer binomials limit m to 12.
Tensor12 tau_closed_form(const OpEval& a, int m);
Tensor12 tau_closed_form(const OperatorField& a, int m, const Point& p);

/// The symmetric remainder tensor: haantjes(A+B) - haantjes(A) - haantjes(B)
/// - binary_haantjes(A,B), evaluated directly from its own expansion (the
/// explicit half plus the operand-swapped copy), not from that difference.
Tensor12 delta_tensor(const OpEval& a, const OpEval& b);
Tensor12 delta_tensor(const OperatorField& a, const OperatorField& b, const Point& p);

// Residuals of the function-scaling identities whose right-hand sides mix
// tensors with Lie derivatives of a scalar field. Each evaluates both sides
// through independent code paths.

/// fn_bracket(f*A, B) vs f*fn_bracket(A,B) + (BX)(f)AY - X(f)BAY
/// - (BY)(f)AX + Y(f)BAX.
ResidualReport fn_scaling_residual(const OperatorField& a, const OperatorField& b, const Expr& f,
                                   const Point& p);

/// binary_haantjes(f*A, B) vs its expansion in f, the commutator [A,B] and
/// Lie derivatives of f.
ResidualReport fab_identity_residual(const OperatorField& a, const OperatorField& b, const Expr& f,
                                     const Point& p);

/// binary_haantjes(A + f*I, B) vs binary_haantjes(A,B) + binary_haantjes(f*I,B)
/// - X(f)B[A,B]Y + Y(f)B[A,B]X + (BX)(f)[A,B]Y - (BY)(f)[A,B]X.
ResidualReport shift_identity_residual(const OperatorField& a, const OperatorField& b,
                                       const Expr& f, const Point& p);

/// nijenhuis(g*A) vs g^2 nijenhuis(A) + g((AX)(g)AY - (AY)(g)AX
/// + Y(g)A^2X - X(g)A^2Y).
ResidualReport nijenhuis_scaling_residual(const OperatorField& a, const Expr& g, const Point& p);

}  // namespace haan
