// SPDX-License-Identifier: Apache-2.0
#include "prelude.hpp"

namespace prolite::detail {

// Library predicates written in the language itself. They count as builtins.
const char* const kPreludeSource = R"PL(
member(X, [X|_]).
member(X, [_|T]) :- member(X, T).
memberchk(X, L) :- member(X, L), !.
once(G) :- call(G), !.
ignore(G) :- ( call(G) -> true ; true ).
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).
length(L, N) :- is_list(L), !, '$list_length'(L, N0), N = N0.
length(L, N) :- integer(N), !, N >= 0, '$make_list'(N, L0), L = L0.
length(L, N) :- var(N), '$length_gen'(L, 0, N).
'$length_gen'([], N, N).
'$length_gen'([_|T], N0, N) :- N1 is N0 + 1, '$length_gen'(T, N1, N).
nth0(I, L, E) :- '$nth'(L, 0, I, E).
nth1(I, L, E) :- '$nth'(L, 1, I, E).
'$nth'(L, B, I, E) :- integer(I), !, I >= B, '$nth_det'(L, B, I, E).
'$nth'(L, B, I, E) :- var(I), '$nth_gen'(L, B, I, E).
'$nth_det'([H|T], B, I, E) :- ( I =:= B -> E = H ; B1 is B + 1, '$nth_det'(T, B1, I, E) ).
'$nth_gen'([H|_], B, B, H).
'$nth_gen'([_|T], B, I, E) :- B1 is B + 1, '$nth_gen'(T, B1, I, E).
last([X], X).
last([_|T], X) :- last(T, X).
reverse(L, R) :- '$reverse'(L, [], R).
'$reverse'([], A, A).
'$reverse'([H|T], A, R) :- '$reverse'(T, [H|A], R).
sum_list(L, S) :- '$sum_list'(L, 0, S).
'$sum_list'([], S, S).
'$sum_list'([H|T], A, S) :- A1 is A + H, '$sum_list'(T, A1, S).
sumlist(L, S) :- sum_list(L, S).
max_list([H|T], M) :- '$max_list'(T, H, M).
'$max_list'([], M, M).
'$max_list'([H|T], A, M) :- A1 is max(A, H), '$max_list'(T, A1, M).
min_list([H|T], M) :- '$min_list'(T, H, M).
'$min_list'([], M, M).
'$min_list'([H|T], A, M) :- A1 is min(A, H), '$min_list'(T, A1, M).
max_member(M, L) :- msort(L, S), last(S, M).
min_member(M, [H|T]) :- msort([H|T], [M|_]).
numlist(L, H, R) :- L > H, !, R = [].
numlist(L, H, [L|T]) :- L1 is L + 1, numlist(L1, H, T).
select(X, [X|T], T).
select(X, [H|T], [H|R]) :- select(X, T, R).
selectchk(X, L, R) :- select(X, L, R), !.
delete([], _, []).
delete([H|T], X, R) :- ( H \= X -> R = [H|R1] ; R = R1 ), delete(T, X, R1).
subtract([], _, []).
subtract([H|T], L, R) :- ( memberchk(H, L) -> R = R1 ; R = [H|R1] ), subtract(T, L, R1).
permutation([], []).
permutation(L, [H|T]) :- select(H, L, R), permutation(R, T).
exclude(_, [], []).
exclude(P, [H|T], R) :- ( call(P, H) -> R = R1 ; R = [H|R1] ), exclude(P, T, R1).
include(_, [], []).
include(P, [H|T], R) :- ( call(P, H) -> R = [H|R1] ; R = R1 ), include(P, T, R1).
maplist(_, []).
maplist(G, [X|Xs]) :- call(G, X), maplist(G, Xs).
maplist(_, [], []).
maplist(G, [X|Xs], [Y|Ys]) :- call(G, X, Y), maplist(G, Xs, Ys).
maplist(_, [], [], []).
maplist(G, [X|Xs], [Y|Ys], [Z|Zs]) :- call(G, X, Y, Z), maplist(G, Xs, Ys, Zs).
maplist(_, [], [], [], []).
maplist(G, [X|Xs], [Y|Ys], [Z|Zs], [W|Ws]) :- call(G, X, Y, Z, W), maplist(G, Xs, Ys, Zs, Ws).
foldl(G, L, A0, A) :- '$foldl1'(L, G, A0, A).
'$foldl1'([], _, A, A).
'$foldl1'([X|Xs], G, A0, A) :- call(G, X, A0, A1), '$foldl1'(Xs, G, A1, A).
foldl(G, L1, L2, A0, A) :- '$foldl2'(L1, L2, G, A0, A).
'$foldl2'([], [], _, A, A).
'$foldl2'([X|Xs], [Y|Ys], G, A0, A) :- call(G, X, Y, A0, A1), '$foldl2'(Xs, Ys, G, A1, A).
all_different(L) :- '$all_different'(L).
all_distinct(L) :- '$all_different'(L).
'$all_different'([]).
'$all_different'([H|T]) :- '$all_neq'(T, H), '$all_different'(T).
'$all_neq'([], _).
'$all_neq'([H|T], X) :- X #\= H, '$all_neq'(T, X).
sum(Vs, Op, V) :- '$sum_expr'(Vs, E), G =.. [Op, E, V], call(G).
'$sum_expr'([], 0).
'$sum_expr'([H|T], H + E) :- '$sum_expr'(T, E).
)PL";

}  // namespace prolite::detail
