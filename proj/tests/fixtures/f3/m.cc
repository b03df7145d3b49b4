fn fact(n){ if n <= 1 { return 1; } return n * @{ fact(n - 1) }; }  #example "fact3" { fact(3); }
