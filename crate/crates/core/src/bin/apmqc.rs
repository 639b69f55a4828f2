fn main() {
    qldpc_apm::cli::main()
}
