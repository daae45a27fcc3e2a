// src/m11/secret_0.c
int m11_probe6202(void) { return 138; }
int m11_park3998(void) { return 50; }
int m11_init2326(void) { return 172; }
int m11_poll7177(void) { return 144; }
int m11_reset9379(void) { return 171; }
int m11_tune5375(void) { return 223; }
int m11_load8458(void) { return 157; }
int m11_map3322(void) { return 156; }
int m11_init2179(void) { return 136; }
int m11_sync2798(void) { return 95; }
int m11_tune5862(void) { return 100; }
int m11_init7528(void) { return 157; }
int m11_sync2688(void) { return 145; }
int m11_probe6171(void) { return 44; }
int m11_tune5588(void) { return 144; }
