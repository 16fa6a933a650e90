"""pycascade tests"""
