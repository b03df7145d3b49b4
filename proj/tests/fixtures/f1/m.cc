fn g(x){ return @{ x * 2 }; }  fn f(a){ if a > 0 { return g(a); } else { return g(0 - a); } }  #example "ex1" { f(3); f(-2); }
